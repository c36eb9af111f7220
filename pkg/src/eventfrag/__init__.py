"""Fragment-level augmentation toolkit for event-camera streams."""

from .core import (
    Domain,
    Event,
    EventStream,
    FragmentSpec,
    SensorGeometry,
    Violation,
    draw_fragment,
    select_fragment,
    sort_stable,
    validate,
)
from .io_formats import FormatError, FormatTag, read, write
from .representation import VoxelGrid, accumulate
from .simulate import (
    BrightnessSignal,
    Perturbation,
    PerturbationKind,
    SceneError,
    SensorModel,
    apply_perturbation,
    generate_events,
    perturbation_effect,
)
from .transforms import (
    DriftParams,
    EstfConfig,
    draw_drift,
    dst,
    estf,
    estf_with_trace,
    event_drop,
    flip_horizontal,
    istp,
    translate,
)

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "Event",
    "EventStream",
    "FragmentSpec",
    "SensorGeometry",
    "Violation",
    "draw_fragment",
    "select_fragment",
    "sort_stable",
    "validate",
    "DriftParams",
    "EstfConfig",
    "draw_drift",
    "dst",
    "estf",
    "estf_with_trace",
    "event_drop",
    "flip_horizontal",
    "istp",
    "translate",
    "BrightnessSignal",
    "Perturbation",
    "PerturbationKind",
    "SceneError",
    "SensorModel",
    "apply_perturbation",
    "generate_events",
    "perturbation_effect",
    "VoxelGrid",
    "accumulate",
    "FormatError",
    "FormatTag",
    "read",
    "write",
]
