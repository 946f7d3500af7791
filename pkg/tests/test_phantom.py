import numpy as np
import pytest

from tumorsal.phantom import (
    BACKGROUND_LEVEL,
    PhantomSpec,
    ShadowSpec,
    TumorSpec,
    generate_phantom,
    phantom_spec_from_json,
    phantom_spec_to_json,
    suite_specs,
)


def ellipse_mask_reference(spec: PhantomSpec) -> np.ndarray:
    """Per-pixel loop over the analytic ellipse inequality."""
    w, h = spec.width, spec.height
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            xn = x / (w - 1) if w > 1 else 0.0
            yn = y / (h - 1) if h > 1 else 0.0
            for t in spec.tumors:
                if ((xn - t.cx) / t.a) ** 2 + ((yn - t.cy) / t.b) ** 2 <= 1.0:
                    out[y, x] = True
    return out


def test_empty_phantom_is_flat_background():
    img, mask = generate_phantom(PhantomSpec(width=16, height=12))
    assert np.all(img.pixels == BACKGROUND_LEVEL)
    assert not mask.pixels.any()


def test_single_ellipse_interior_and_mask():
    spec = PhantomSpec(
        width=40,
        height=40,
        tumors=(TumorSpec(cx=0.5, cy=0.5, a=0.2, b=0.2, depth=0.8),),
    )
    img, mask = generate_phantom(spec)
    expected = ellipse_mask_reference(spec)
    assert np.array_equal(mask.pixels, expected)
    assert np.allclose(img.pixels[expected], 0.12)  # 0.6 * (1 - 0.8)
    assert np.all(img.pixels[~expected] == BACKGROUND_LEVEL)


def test_determinism_bit_identical():
    spec = PhantomSpec(
        width=32,
        height=32,
        tumors=(TumorSpec(0.5, 0.5, 0.15, 0.1, 0.7, edge_fuzz=2.0),),
        speckle_strength=0.2,
        shadow=ShadowSpec(col_start=4, col_end=9, attenuation=0.8),
        rng_seed=99,
    )
    a_img, a_mask = generate_phantom(spec)
    b_img, b_mask = generate_phantom(spec)
    assert np.array_equal(a_img.pixels, b_img.pixels)
    assert np.array_equal(a_mask.pixels, b_mask.pixels)


def test_different_seeds_differ():
    base = dict(width=32, height=32, speckle_strength=0.2)
    a, _ = generate_phantom(PhantomSpec(rng_seed=1, **base))
    b, _ = generate_phantom(PhantomSpec(rng_seed=2, **base))
    assert not np.array_equal(a.pixels, b.pixels)


def test_border_touching_tumor_rejected():
    spec = PhantomSpec(
        width=32, height=32, tumors=(TumorSpec(cx=0.1, cy=0.5, a=0.2, b=0.2, depth=0.5),)
    )
    with pytest.raises(ValueError, match="border"):
        generate_phantom(spec)


def test_edge_fuzz_keeps_mask_and_interior():
    sharp = PhantomSpec(width=48, height=48, tumors=(TumorSpec(0.5, 0.5, 0.2, 0.2, 0.8),))
    fuzzy = PhantomSpec(
        width=48, height=48, tumors=(TumorSpec(0.5, 0.5, 0.2, 0.2, 0.8, edge_fuzz=3.0),)
    )
    img_s, mask_s = generate_phantom(sharp)
    img_f, mask_f = generate_phantom(fuzzy)
    assert np.array_equal(mask_s.pixels, mask_f.pixels)  # mask is pre-fuzz
    inside = mask_s.pixels
    assert np.array_equal(img_s.pixels[inside], img_f.pixels[inside])
    ramp = ~inside & (img_f.pixels < BACKGROUND_LEVEL)
    assert ramp.any()
    assert np.all(img_f.pixels[ramp] > 0.12)


def test_speckle_stays_in_declared_band():
    spec = PhantomSpec(width=32, height=32, speckle_strength=0.1, rng_seed=5)
    img, _ = generate_phantom(spec)
    lo = BACKGROUND_LEVEL * (1.0 - 0.05)
    hi = BACKGROUND_LEVEL * (1.0 + 0.05)
    assert img.pixels.min() >= lo and img.pixels.max() <= hi


def test_shadow_attenuates_band_only():
    spec = PhantomSpec(
        width=20, height=10, shadow=ShadowSpec(col_start=5, col_end=8, attenuation=0.5)
    )
    img, _ = generate_phantom(spec)
    assert np.all(img.pixels[:, 5:8] == BACKGROUND_LEVEL * 0.5)
    assert np.all(img.pixels[:, :5] == BACKGROUND_LEVEL)
    assert np.all(img.pixels[:, 8:] == BACKGROUND_LEVEL)


def test_spec_json_round_trip():
    spec = PhantomSpec(
        width=64,
        height=48,
        tumors=(TumorSpec(0.4, 0.5, 0.1, 0.12, 0.6, edge_fuzz=1.5),),
        speckle_strength=0.1,
        shadow=ShadowSpec(2, 6, 0.9),
        rng_seed=123,
    )
    assert phantom_spec_from_json(phantom_spec_to_json(spec)) == spec


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        TumorSpec(0.5, 0.5, a=0.0, b=0.1, depth=0.5)
    with pytest.raises(ValueError):
        TumorSpec(0.5, 0.5, a=0.1, b=0.1, depth=1.5)
    with pytest.raises(ValueError):
        PhantomSpec(width=0, height=4)
    with pytest.raises(ValueError):
        ShadowSpec(col_start=5, col_end=5, attenuation=0.5)


def test_suite_specs_deterministic_and_constrained():
    a = suite_specs()
    b = suite_specs()
    assert [name for name, _ in a] == [name for name, _ in b]
    assert all(sa == sb for (_, sa), (_, sb) in zip(a, b))
    tumors = [spec for name, spec in a if name.startswith("tumor")]
    plains = [spec for name, spec in a if name.startswith("plain")]
    assert len(tumors) == 20 and len(plains) == 20
    for spec in tumors:
        assert len(spec.tumors) == 1
        lesion = spec.tumors[0]
        assert lesion.depth >= 0.5
        assert min(lesion.a, lesion.b) >= 0.08
        assert spec.speckle_strength == 0.1
    for spec in plains:
        assert not spec.tumors
        assert spec.speckle_strength == 0.1
