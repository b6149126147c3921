"""Multiple-quantum-coherence spectra and their second moment for
non-Hermitian Hamiltonians: biorthogonal dense diagonalization, the
coherence-order machinery, closed-form oracles, sweep harnesses, and a
simulated phase-encoding retrieval protocol."""

__version__ = "0.1.0"

from .coherence import (
    MQISpectrum,
    Normalization,
    PureBiorthState,
    ReferenceBasis,
    decompose,
    make_reference_basis,
    mqi,
    state_from_eigensystem,
    sum_rule,
)
from .errors import (
    AliasingError,
    ConfigError,
    ConsistencyError,
    DefectiveSpectrumError,
    EnsembleFailureError,
    ExceptionalPointError,
    NHMQCError,
    NoPeakError,
    NonHermitianError,
)
from .experiments import (
    CriticalPointResult,
    EnsembleStats,
    PhaseDiagram,
    ScanRow,
    StateSelector,
    SweepRow,
    SweepSpec,
    disorder_ensemble,
    extract_critical_point,
    finite_size_scan,
    phase_diagram_2d,
    select_state,
    sweep_1d,
)
from .linalg import (
    EigenSystem,
    commutator_norm,
    eig_general,
    eig_hermitian,
    reconstruct,
)
from .models import (
    DisorderParams,
    HNParams,
    IsingParams,
    TwoLevelParams,
    build_collective_sz,
    build_hatano_nelson,
    build_ising,
    build_spin_observable,
    build_two_level,
    hermitian_split,
    sample_disorder,
)
from .oracles import (
    DeltaIdentityReport,
    HNClosedForm,
    TwoLevelClosedForm,
    ValidationReport,
    hn_obc_closed_form,
    hn_obc_ground_f_squared,
    hn_pbc_closed_form,
    hn_pbc_delta_identity,
    run_validation_suite,
    two_level_eigensystem_closed_form,
    two_level_mqi_closed_form,
)
from .protocol import (
    ProtocolSignal,
    RetrievedMQI,
    fidelity_signal,
    parseval_residual,
    retrieve_mqi,
    rotate,
)
