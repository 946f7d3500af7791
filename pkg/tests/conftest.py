import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

from tumorsal.image import save_image, save_mask
from tumorsal.phantom import PhantomSpec, TumorSpec, generate_phantom, suite_specs


@pytest.fixture(scope="session")
def tumor_phantom():
    """One deterministic lesion phantom: (spec, image, mask)."""
    spec = PhantomSpec(
        width=64,
        height=64,
        tumors=(TumorSpec(cx=0.5, cy=0.45, a=0.15, b=0.15, depth=0.8),),
        speckle_strength=0.1,
        rng_seed=7,
    )
    img, mask = generate_phantom(spec)
    return spec, img, mask


@pytest.fixture(scope="session")
def plain_phantom():
    """A lesion-free speckled phantom image."""
    spec = PhantomSpec(width=64, height=64, speckle_strength=0.1, rng_seed=3)
    img, _ = generate_phantom(spec)
    return img


@pytest.fixture(scope="session")
def small_suite_dir(tmp_path_factory):
    """Directory with a few small image/mask pairs for dataset-level tests."""
    root = tmp_path_factory.mktemp("suite")
    for name, spec in suite_specs(n_tumor=3, n_plain=0, size=48, seed=11):
        img, mask = generate_phantom(spec)
        save_image(img, root / f"{name}.pgm")
        save_mask(mask, root / f"{name}_gt.pgm")
    return root


@pytest.fixture()
def rng():
    return np.random.default_rng(20260808)
