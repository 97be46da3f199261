"""Smoke test for the Python bindings.

Build and install the extension first, for example with
``maturin develop -m crates/python/Cargo.toml``, then run
``python python/smoke_test.py``.
"""

import json
import math
import os
import tempfile

import polarcut


def main():
    vol, truth = polarcut.sphere_phantom((48, 48, 48), (1.0, 1.0, 1.0), (24.0, 24.0, 24.0), 10.0, noise_sigma=5.0, rng_seed=3)
    assert vol.dims == [48, 48, 48]
    ball = 4.0 / 3.0 * math.pi * 1000.0
    assert abs(truth.count() - ball) / ball < 0.02

    out = polarcut.segment(vol, (24.0, 24.0, 24.0), level=3)
    score = polarcut.dsc(out.mask, truth)
    stats = out.stats()
    print(f"one-click DSC {score:.4f}, {stats['rays']} rays, cut cost {stats['cut_cost']:.1f}")
    assert score >= 0.95
    assert len(out.radii()) == len(out.directions()) == 642
    assert out.contours(24), "no contour on the center slice"
    assert out.mesh_obj().count("\nf ") > 0

    # An extra seed pins its ray.
    extra = (24.0 + 10.0, 24.0, 24.0)
    pinned = polarcut.segment(vol, (24.0, 24.0, 24.0), extra_seeds=[extra], level=3)
    assert len(pinned.stats()["constraints"]) == 1

    try:
        polarcut.segment(vol, (24.0, 24.0, 99.0))
    except polarcut.PolarcutError as e:
        assert e.args[0] == "seed_out_of_bounds"
    else:
        raise AssertionError("out-of-bounds seed accepted")

    value, side = polarcut.max_flow(2, [("s", 0, 3.0), (0, 1, 2.0), (1, "t", 5.0)])
    assert value == 2.0 and side == [True, False]

    spec = {
        "dims": [32, 32, 32],
        "spacing": [1.0, 1.0, 1.0],
        "object": {"kind": "sphere", "center": [16.0, 16.0, 16.0], "radius": 6.0},
        "foreground_mean": 100.0,
        "background_mean": 0.0,
        "noise_sigma": 0.0,
        "rng_seed": 1,
    }
    _, small = polarcut.phantom(json.dumps(spec))
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "small.nii")
        small.save(path)
        back = polarcut.Mask.load(path)
        assert polarcut.dsc(back, small) == 1.0

    print("smoke test passed")


if __name__ == "__main__":
    main()
