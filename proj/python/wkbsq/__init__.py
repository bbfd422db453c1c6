from ._core import (  # noqa: F401
    Cone,
    Novikov,
    WkbsqError,
    cone_of,
    is_gamma_finite,
    run_problem,
    trace_graph,
    turning_points,
    wkb_eval,
    wkb_terms,
    __version__,
)
