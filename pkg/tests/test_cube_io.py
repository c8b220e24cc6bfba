import json

import numpy as np
import pytest

from plumefilters.cube_io import (
    EnhancementMap,
    HyperCube,
    PlumeMask,
    TargetSpectrum,
    check_alignment,
    load_spectrum,
    read_cube,
    read_map,
    read_mask,
    save_spectrum,
    write_cube,
    write_map,
    write_mask,
    write_pgm,
)
from plumefilters.errors import (
    FormatError,
    ParseError,
    SizeMismatchError,
    ValidationError,
)

from conftest import random_cube


def test_roundtrip_bit_exact(rng, tmp_path):
    for _ in range(20):
        h, w, p = rng.integers(1, 9), rng.integers(1, 9), rng.integers(2, 12)
        cube = random_cube(rng, int(h), int(w), int(p))
        path = tmp_path / "cube.bin"
        write_cube(cube, path)
        back = read_cube(path)
        assert back.data.tobytes() == cube.data.tobytes()
        assert back.wavelengths.tobytes() == cube.wavelengths.tobytes()


def test_smallest_valid_cube(tmp_path):
    cube = HyperCube(
        data=np.array([[[0.5, 0.25]]], dtype=np.float32), wavelengths=[2100.0, 2101.0]
    )
    path = tmp_path / "tiny.bin"
    write_cube(cube, path)
    back = read_cube(path)
    assert back.height == 1 and back.width == 1 and back.bands == 2
    assert back.data[0, 0, 0] == 0.5 and back.data[0, 0, 1] == 0.25


def test_payload_size_is_declared_size(rng, tmp_path):
    cube = random_cube(rng, 7, 5, 6)
    path = tmp_path / "c.bin"
    write_cube(cube, path)
    assert path.stat().st_size == 7 * 5 * 6 * 4


def test_size_mismatch(tmp_path):
    header = {
        "height": 10, "width": 10, "bands": 5,
        "wavelengths": list(np.linspace(2100, 2500, 5)),
        "dtype": "f32le", "layout": "bip",
    }
    (tmp_path / "bad.json").write_text(json.dumps(header))
    np.zeros(499, dtype="<f4").tofile(tmp_path / "bad.bin")
    with pytest.raises(SizeMismatchError):
        read_cube(tmp_path / "bad.bin")


def test_missing_and_corrupt_header(tmp_path):
    np.zeros(10, dtype="<f4").tofile(tmp_path / "x.bin")
    with pytest.raises(FormatError):
        read_cube(tmp_path / "x.bin")
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(FormatError):
        read_cube(tmp_path / "x.bin")


@pytest.mark.parametrize(
    "mutation",
    [
        lambda h: h.pop("layout"),
        lambda h: h.update(layout="bsq"),
        lambda h: h.update(dtype="f64le"),
        lambda h: h.update(extra=1),
        lambda h: h.update(height="ten"),
        lambda h: h.update(wavelengths=[1.0]),
        lambda h: h.update(height=0),
    ],
)
def test_malformed_headers_rejected(rng, tmp_path, mutation):
    cube = random_cube(rng, 3, 3, 4)
    path = tmp_path / "c.bin"
    write_cube(cube, path)
    header = json.loads((tmp_path / "c.json").read_text())
    mutation(header)
    (tmp_path / "c.json").write_text(json.dumps(header))
    with pytest.raises(FormatError):
        read_cube(path)


def test_fuzzed_reads_always_valid_or_error(rng, tmp_path):
    # Whatever survives read_cube satisfies the cube invariants.
    path = tmp_path / "f.bin"
    for trial in range(100):
        h, w, p = int(rng.integers(0, 5)), int(rng.integers(0, 5)), int(rng.integers(0, 6))
        wavelengths = rng.uniform(2000, 2600, max(p, 0))
        if rng.random() < 0.5:
            wavelengths = np.sort(wavelengths)
        header = {
            "height": h, "width": w, "bands": p,
            "wavelengths": list(wavelengths),
            "dtype": "f32le", "layout": "bip",
        }
        (tmp_path / "f.json").write_text(json.dumps(header))
        payload = rng.standard_normal(int(rng.integers(0, 200))).astype("<f4")
        if rng.random() < 0.1 and payload.size:
            payload[0] = np.nan
        payload.tofile(path)
        try:
            cube = read_cube(path)
        except (FormatError, ValidationError):
            continue
        assert cube.height >= 1 and cube.width >= 1 and cube.bands >= 2
        assert np.all(np.diff(cube.wavelengths) > 0)
        assert np.isfinite(cube.data).all()


def test_nan_cube_rejected_before_write():
    with pytest.raises(ValidationError):
        HyperCube(
            data=np.array([[[np.nan, 1.0]]], dtype=np.float32),
            wavelengths=[2100.0, 2200.0],
        )


def test_wavelengths_must_increase():
    with pytest.raises(ValidationError):
        HyperCube(data=np.zeros((1, 1, 2), dtype=np.float32), wavelengths=[2200.0, 2100.0])


def test_spectrum_roundtrip_and_sorting(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("wavelength_nm,value\n2300,-0.5\n2100,-1.0\n")
    spectrum = load_spectrum(path)
    assert list(spectrum.wavelengths) == [2100.0, 2300.0]
    assert list(spectrum.values) == [-1.0, -0.5]
    out = tmp_path / "out.csv"
    save_spectrum(spectrum, out)
    again = load_spectrum(out)
    assert np.array_equal(again.wavelengths, spectrum.wavelengths)
    assert np.array_equal(again.values, spectrum.values)


def test_spectrum_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ParseError):
        load_spectrum(empty)

    dup = tmp_path / "dup.csv"
    dup.write_text("wavelength_nm,value\n2100,-1\n2100,-2\n")
    with pytest.raises(ValidationError):
        load_spectrum(dup)

    junk = tmp_path / "junk.csv"
    junk.write_text("wavelength_nm,value\n2100,abc\n")
    with pytest.raises(ParseError):
        load_spectrum(junk)

    headerless = tmp_path / "nohdr.csv"
    headerless.write_text("2100,-1\n2200,-2\n")
    with pytest.raises(ParseError):
        load_spectrum(headerless)


def test_alignment_tolerance(rng):
    cube = random_cube(rng, 2, 2, 5)
    good = TargetSpectrum(wavelengths=cube.wavelengths + 0.4, values=-np.ones(5))
    check_alignment(cube, good)
    bad = TargetSpectrum(wavelengths=cube.wavelengths + 0.6, values=-np.ones(5))
    with pytest.raises(ValidationError):
        check_alignment(cube, bad)
    short = TargetSpectrum(wavelengths=cube.wavelengths[:4], values=-np.ones(4))
    with pytest.raises(ValidationError):
        check_alignment(cube, short)


def test_map_and_mask_containers(rng, tmp_path):
    values = rng.standard_normal((6, 4)).astype(np.float32).astype(np.float64)
    enhancement = EnhancementMap(values=values, product_tag="cem")
    write_map(enhancement, tmp_path / "m.bin")
    back = read_map(tmp_path / "m.bin", product_tag="cem")
    assert np.array_equal(back.values, values)
    assert back.product_tag == "cem"

    mask = PlumeMask(values=values > 0)
    write_mask(mask, tmp_path / "k.bin")
    assert np.array_equal(read_mask(tmp_path / "k.bin").values, mask.values)

    header = json.loads((tmp_path / "m.json").read_text())
    assert set(header) == {"height", "width", "bands", "wavelengths", "dtype", "layout"}
    assert header["bands"] == 1


def test_pgm_export(tmp_path, rng):
    enhancement = EnhancementMap(values=rng.standard_normal((5, 7)))
    write_pgm(enhancement, tmp_path / "m.pgm")
    raw = (tmp_path / "m.pgm").read_bytes()
    assert raw.startswith(b"P5\n7 5\n255\n")
    assert len(raw) == len(b"P5\n7 5\n255\n") + 35
