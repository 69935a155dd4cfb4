"""mixcal: a virtual lab for in-situ IQ mixer calibration.

Simulates an imperfect up-converting IQ mixer driving a superconducting
qubit / readout-resonator system, measures the qubit's response to the
spurious tones, and recovers the calibration knobs with a center-of-gravity
plus centrosymmetry search.
"""

from .calibrator import (
    CenterEstimate,
    SearchConfig,
    calibrate,
    center_of_gravity,
    centrosymmetry_loss,
    refine_center,
)
from .errors import (
    ConfigError,
    CorruptRecordError,
    DegenerateGridError,
    DomainError,
    MixcalError,
    SingularityError,
    StoreError,
    TruncationError,
)
from .grid import GridSpec, ScanGrid
from .grid_io import grid_to_csv, parse_grid_csv, read_grid_csv, write_grid_csv
from .qubit_dynamics import (
    DriveScanConfig,
    DriveTone,
    QubitParams,
    QubitState,
    drive_scan_map,
    evolve_two_level,
    leakage_ground_population,
    recommended_step,
    sideband_ground_population,
)
from .resonator_dynamics import (
    JointState,
    RamseyConfig,
    ResonatorDrive,
    ResonatorParams,
    evolve_jaynes_cummings,
    filter_factor,
    measurement_scan_map,
    numeric_qubit_shift,
    qubit_shift,
    ramsey_population,
    steady_photon_number,
)
from .signal_model import (
    DacCorrection,
    MixerImperfection,
    RfSpectrum,
    SquarePulse,
    Tone,
    residual_power_db,
    synthesize_spectrum,
)
from .store import CalibrationRecord, store_append, store_list
from .virtual_lab import (
    CalibrationOutcome,
    NoiseModel,
    SweepRow,
    VirtualSetup,
    calibrate_drive_mixer,
    calibrate_measurement_mixer,
    default_setup,
    detuning_sweep,
    exact_corrections,
    measure_population,
    run_drive_leakage_scan,
    run_drive_sideband_scan,
    run_measurement_leakage_scan,
)

__version__ = "0.1.0"
