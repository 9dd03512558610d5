"""sceneforge: turn raw 3D scene meshes into multi-modal surface-completion
datasets (segmented sub-meshes, RGB/depth renders, partial point clouds,
captions, manifests) and evaluate completion outputs.
"""

__version__ = "0.1.0"

from .camera import (
    CameraIntrinsics,
    CameraPose,
    TrajectoryWaypoint,
    default_intrinsics,
    look_at_pose,
    pose_from_waypoint,
    random_viewpoints,
)
from .dataset import (
    DatasetManifest,
    GenerationParams,
    build_dataset,
    import_external,
    validate_dataset,
)
from .geometry import (
    Aabb,
    NnIndex,
    PointCloud,
    SimilarityTransform,
    TriangleMesh,
    build_nn_index,
    normalize_to_unit_cube,
    sample_surface,
    surface_area,
    triangle_areas,
)
from .meshio import (
    LoadReport,
    load_mesh,
    load_mesh_with_report,
    load_point_cloud,
    save_mesh,
    save_point_cloud,
)
from .metrics import (
    MetricsConfig,
    MetricsReport,
    auc,
    chamfer,
    evaluate,
    evaluate_batch,
    fscore,
    point_set_distance,
    precision_recall,
)
from .partial import PartialCloud, ViewBundle, backproject, combine_views, generate_partials, make_partials
from .providers import (
    Caption,
    LabelMask,
    PromptBox,
    PromptPoint,
    PromptSet,
    ProviderConfig,
    RelevanceScore,
    caption_segment,
    fallback_mask,
    request_mask,
    score_relevance,
)
from .raster import BevFrame, DepthImage, LightSpec, RgbImage, render, render_bev
from .segmentation import (
    SegmentationParams,
    SegmentRecord,
    SliceReport,
    segment_scene_auto,
    segment_scene_manual,
    slice_by_mask,
)
