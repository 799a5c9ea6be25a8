"""Pseudo-metric kernels for non-Hermitian Schrodinger operators."""

from qmetric.potentials import (
    PhysConstants,
    Domain,
    PotentialSpec,
    constants_preset,
    eval_potential,
    eval_mass_term,
    square_well,
    scattering_potential,
    delta_potential,
    pt_delta_pairs,
)
from qmetric.kernels import (
    Grid,
    Kernel,
    SeedPair,
    OperatorForm,
    identity_kernel,
    parity_kernel,
    smooth_kernel,
    seed_to_kernel,
    hermiticity_defect,
    operator_form_free,
    kernel_to_csv,
    kernel_from_csv,
    kernel_to_pgm,
)
from qmetric.closed_forms import (
    square_well_k_delta,
    square_well_eta1,
    bender_tan_Q,
    scattering_k_delta,
    scattering_eta1,
    delta_first_iterate,
    delta_second_iterate,
    deltas_eta1,
    preset_w,
    preset_seed,
)
from qmetric.series import (
    KConfig,
    SeriesState,
    apply_K,
    apply_K_to_identity,
    apply_K_smooth,
    apply_K_delta_rule,
    neumann_series,
    convergence_bound,
)
from qmetric.spectral import (
    DiscretizedHamiltonian,
    BiorthonormalSystem,
    ExceptionalPointError,
    discretize,
    free_box_levels,
    biorthonormalize,
    spectral_metric,
    spectrum_to_csv,
)
from qmetric.verify import (
    CheckReport,
    kernel_matrix,
    kg_residual,
    pseudo_hermiticity_residual,
    positivity_check,
    invertibility_check,
)

__version__ = "0.1.0"
