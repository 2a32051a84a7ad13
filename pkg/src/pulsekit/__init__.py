"""pulsekit: compile and exactly simulate robust high-order simulation pulse sequences."""

from .operators import (
    HERMITIAN_TOL,
    MAX_QUBITS,
    UNITARY_TOL,
    Operator,
    PauliString,
    hermitian_expm,
    infidelity,
    operator_norm,
    pauli,
    pauli_matrix,
)
from .pulses import PulseSpec, magnus_first, pulse_propagator, reverse_pulse, stretch_pulse
from .schedule import (
    Block,
    FirstOrderSequence,
    Free,
    Instant,
    Pulse,
    PulseSchedule,
    Simulator,
    check_first_order,
    raw_schedule,
    simulate,
    simulation_error,
    toggling_frames,
)
from .trotter import MPFPlan, TrotterPlan, alpha_comm, mpf_coefficients, suzuki_plan, trotter_matrix
from .dcg import (
    DCGGenerator,
    DCGSpec,
    DecouplingGroup,
    build_first_order_dcg,
    cayley_graph,
    close_group,
    concatenate_dcg,
    eulerian_cycle,
)
from .negtime import (
    NegativeTimeBlock,
    cdd_identity_block,
    negative_time,
    oracle_negative_block,
    sym_eulerian_identity_block,
)
from .compiler import (
    CompiledSchedule,
    NegTimeRouter,
    compile_c1,
    compile_c2,
    extract_exponents_c1,
    extract_exponents_c2,
)
from .mpf import MPFJob, mpf_estimate, mpf_stretching_c2
from .sweeps import fit_slope, preset, run_sweep

__version__ = "0.1.0"
