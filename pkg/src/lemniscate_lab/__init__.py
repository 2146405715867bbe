"""Monte Carlo lab for random lemniscates.

Samples the degree-n spherical rational ensemble p_n/q_n and its plane
scaling limit G_1/G_2 of Gaussian entire functions, traces the lemniscate
{|ratio| = 1} as the zero set of the H-field, counts and measures its nodal
components, and runs the quantitative campaigns (length law, zero/pole
intensity, component-density estimates, sandwich and small-component
diagnostics) with reproducible seeding.
"""

from .rng import (
    CoefficientDraw,
    StreamSeed,
    derive_stream,
    draw_complex_gaussians,
    generator,
    stream_fingerprint,
)
from .plane import (
    DegenerateSampleError,
    PlaneFieldSample,
    conditional_gradient_draw,
    covariance_oracle,
    eval_H_plane,
    eval_normalized_F,
    sample_plane_pair,
    truncation_order,
    uniformity_statistic,
)
from .sphere import (
    SphereFieldSample,
    antipodal_view,
    cap_area,
    cap_chart_radius,
    chart_to_base,
    eval_Hn,
    eval_normalized_Fn,
    inverse_stereographic,
    rotation_to_south,
    sample_sphere_pair,
    scaled_covariance_gap,
    stereographic,
    uniform_sphere_points,
)
from .topology import (
    ChartGrid,
    ComponentCensus,
    CurveComponent,
    DomainSet,
    GlobalSphereCensus,
    LevelCurveSet,
    build_chart_grid,
    component_census,
    extract_level_curves,
    global_census_from_evaluators,
    global_sphere_census,
    sign_domains,
)
from .winding import WindingCensus, disc_cell_mask, winding_zero_count
from .estimators import (
    CheckResult,
    DistributionChecksReport,
    EstimateReport,
    ExcludedSample,
    LocalCountPair,
    SandwichReport,
    SmallComponentReport,
    check_sandwich,
    default_sphere_spacing,
    distribution_checks,
    estimate_cns_plane,
    estimate_length,
    estimate_local_count_sphere,
    estimate_sphere_global,
    estimate_zero_pole_intensity,
    reports_agree,
    small_component_scaling,
)

__version__ = "0.1.0"
