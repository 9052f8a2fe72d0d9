"""Object-based test generation: trace the digit outline, elongate annotated
segments, fill the edited outline back into an image."""
from .contours import ContourPolyline, trace_contours
from .elongation import (
    ElongationLevels,
    ObjectPlan,
    ObjectSettings,
    SeedObject,
    elongate,
    enumerate_object_plans,
    generate_object_image,
    load_object_settings,
    parse_object_settings,
)
from .raster import rasterize
from .segments import (
    SEGMENT_COUNTS,
    SegmentAnnotation,
    format_annotations,
    load_annotations,
    parse_annotations,
    suggest_segments,
)

__all__ = [
    "ContourPolyline",
    "ElongationLevels",
    "ObjectPlan",
    "ObjectSettings",
    "SEGMENT_COUNTS",
    "SeedObject",
    "SegmentAnnotation",
    "elongate",
    "enumerate_object_plans",
    "format_annotations",
    "generate_object_image",
    "load_annotations",
    "load_object_settings",
    "parse_annotations",
    "parse_object_settings",
    "rasterize",
    "suggest_segments",
    "trace_contours",
]
