"""Entropy, maximum density and norm inequalities for convex measures.

Modules: ``distributions`` (density families), ``entropy`` (closed-form,
quadrature and Monte Carlo entropies), ``inequalities`` (the bound-check
catalog), ``spectral`` (characteristic functions and Gaussian processes),
``convmix`` (self-convolutions and scale mixtures) and ``cli``.
"""

__version__ = "0.1.0"

# the function ``entropy.entropy`` is not re-exported: it would shadow the submodule
from .distributions import (  # noqa: E402
    AffineImage,
    Body,
    Cauchy1D,
    Convexity,
    ExponentialProduct,
    Gaussian,
    ParetoMV,
    PotentialDensity,
    StableSymmetric1D,
    UniformBody,
    kappa_classify,
    locate_mode,
    max_density,
    moments,
    pdf,
    sample,
    spec_from_dict,
    spec_to_dict,
)
from .entropy import (  # noqa: E402
    D_gaussianity,
    Estimate,
    entropy_closed,
    entropy_mc,
    entropy_quad,
    isotropic_constant,
    pareto_L,
    pareto_Z,
    renyi_closed,
    renyi_quad,
)
from .inequalities import (  # noqa: E402
    CATALOG,
    BoundCheck,
    beta_regime_bound,
    iso_lower_constant,
    kconc_upper_bound,
    run_catalog,
    run_check,
)
from .spectral import (  # noqa: E402
    CharFn,
    SpectralModel,
    charfn_of,
    plancherel_window,
    process_rate_bounds,
    szego_rate,
    toeplitz_trajectory,
)
from .convmix import (  # noqa: E402
    MixtureSpec,
    junge_bound,
    mixture_bounds,
    mixture_entropy_mc,
    mixture_entropy_quad,
    mixture_logconcavity_condition,
    self_convolve_max,
)
