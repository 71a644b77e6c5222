"""csflab: a numerical laboratory for planar curve shortening flow.

Submodules
----------
curves       sampled curves, discrete geometry, resampling, distances
exact        closed-form solutions and glued multi-reaper initial data
flow         parametric/graphical steppers, rescaling, avoidance
functionals  Gaussian entropy, total curvature, areas, L1 distance
spectral     rescaled-flow mode dynamics, dichotomy, sharp-limit fits
analysis     feature detection, edge classes, quantitative asymptotics
persist      trajectory files, CSV series, JSON reports
svgplot      deterministic SVG emission
cli          command-line runner
"""

from .curves import (CurveGeometry, PlanarCurve, curve_length, geometry,
                     hausdorff_distance, min_distance, resample_arclength,
                     self_intersects)
from .exact import (GrimReaperSpec, TromboneSpec, grim_reaper_curve, grim_reaper_point,
                    line_curve, paperclip, paperclip_residual, shrinking_circle,
                    trombone_initial)
from .flow import (EvolveOptions, FlowSnapshot, FlowTrajectory, SheetGraph,
                   avoidance_check, evolve, evolve_graphical, rescale, step_graphical,
                   step_parametric, unrescale)
from .functionals import (EntropyResult, FingerRegion, entropy, finger_area,
                          gaussian_inner, l1_graph_distance, total_curvature)
from .spectral import (SpectralState, cutoff, eigenbasis_check, error_terms,
                       hypotheses_check, interpolation_check, mode_track, mz_classify,
                       project, sharp_limit_fit)
from .analysis import (classify_edge, detect_features, fit_best_reaper,
                       height_decay_fit, l1_contraction_check, strip_confinement,
                       tip_limit_check, track_fingers, validate_config,
                       vertex_asymptotics)

__version__ = "0.1.0"
