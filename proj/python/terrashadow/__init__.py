from ._core import (
    Scene,
    SceneError,
    compare_images,
    load_scene,
    max_mipmap,
    occlusion_fraction,
    segment_fraction,
    synth_scene,
    synth_scene_names,
)

__all__ = [
    "Scene",
    "SceneError",
    "compare_images",
    "load_scene",
    "max_mipmap",
    "occlusion_fraction",
    "segment_fraction",
    "synth_scene",
    "synth_scene_names",
]
