import json
import math
import os

import numpy as np
import pytest

from holofigs.cli import main
from holofigs.render import render_pmd_panels, render_scaling_panels
from holofigs.spec import FigureError, FigureSpec, load_spec


def write_pmd_csv(path, amplitude=1.0):
    pz = np.linspace(-2.0, 2.0, 60)
    pp = np.linspace(0.0, 0.8, 20)
    with open(path, "w") as fh:
        fh.write("pz,pperp,value\n")
        for z in pz:
            for t in pp:
                value = amplitude * math.exp(-z * z - 4 * t * t) * (1 + 0.4 * math.cos(30 * z))
                fh.write(f"{float(z)!r},{float(t)!r},{float(value)!r}\n")


def write_meta(path):
    with open(path, "w") as fh:
        json.dump({"constants": {"p_2up": 1.757}}, fh)


def write_visibility_r(path):
    with open(path, "w") as fh:
        fh.write("state,r,pz,visibility\n")
        for r in (0.0, 0.5, 1.0, 1.5):
            fh.write(f"PS,{r},0.8,{math.exp(-0.2 * math.exp(2 * r))!r}\n")
            fh.write(f"AS,{r},0.8,{min(0.99, 0.8 + 0.1 * r)!r}\n")
            fh.write(f"CS,{r},0.8,0.8\n")


def write_visibility_lambda(path):
    with open(path, "w") as fh:
        fh.write("state,lambda_um,visibility\n")
        for lam in (0.8, 1.2, 1.6, 2.0):
            fh.write(f"PS,{lam},{math.exp(-0.25 * lam**4)!r}\n")
            fh.write(f"AS,{lam},0.93\n")


def write_fisher(path):
    with open(path, "w") as fh:
        fh.write("r,cfi,cfi_over_sql\n")
        for r in (0.75, 1.0, 1.25, 1.5):
            f = math.exp(4 * r)
            fh.write(f"{r},{f!r},{f!r}\n")


def write_fit_json(path):
    with open(path, "w") as fh:
        json.dump(
            {
                "PS": {"eta": 0.2, "offset": 0.0, "goodness": 0.999, "beta": 0.25},
            },
            fh,
        )


@pytest.fixture()
def pmd_spec(tmp_path):
    for name in ("cs", "as", "ps"):
        write_pmd_csv(tmp_path / f"{name}.csv", amplitude={"cs": 1.0, "as": 1.3, "ps": 0.7}[name])
    write_meta(tmp_path / "meta.json")
    spec = {
        "kind": "pmd_panels",
        "inputs": {
            "cs": str(tmp_path / "cs.csv"),
            "as": str(tmp_path / "as.csv"),
            "ps": str(tmp_path / "ps.csv"),
            "meta": str(tmp_path / "meta.json"),
        },
        "output": {"path": str(tmp_path / "fig_pmd"), "formats": ["png", "svg"]},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    return str(spec_path)


@pytest.fixture()
def scaling_spec(tmp_path):
    write_visibility_r(tmp_path / "vis_r.csv")
    write_visibility_lambda(tmp_path / "vis_lam.csv")
    write_fisher(tmp_path / "fisher.csv")
    write_fit_json(tmp_path / "fit.json")
    spec = {
        "kind": "scaling_panels",
        "inputs": {
            "visibility_vs_r": str(tmp_path / "vis_r.csv"),
            "squeeze_fit": str(tmp_path / "fit.json"),
            "visibility_vs_lambda": str(tmp_path / "vis_lam.csv"),
            "wavelength_fit": str(tmp_path / "fit.json"),
            "fisher_vs_r": str(tmp_path / "fisher.csv"),
        },
        "output": {"path": str(tmp_path / "fig_scaling"), "formats": ["png", "svg"]},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    return str(spec_path)


class TestSpec:
    def test_load_valid(self, pmd_spec):
        spec = load_spec(pmd_spec)
        assert spec.kind == "pmd_panels"
        assert spec.formats == ("png", "svg")

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"kind": "pie", "output": {"path": "x"}}))
        with pytest.raises(FigureError):
            load_spec(str(path))

    def test_missing_output(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"kind": "pmd_panels"}))
        with pytest.raises(FigureError):
            load_spec(str(path))


class TestPmdPanels:
    def test_renders_both_formats(self, pmd_spec):
        spec = load_spec(pmd_spec)
        written = render_pmd_panels(spec)
        assert len(written) == 2
        for path in written:
            assert os.path.getsize(path) > 0

    def test_missing_input_no_partial_output(self, pmd_spec, tmp_path):
        spec = load_spec(pmd_spec)
        os.remove(spec.inputs["ps"])
        with pytest.raises(FigureError):
            render_pmd_panels(spec)
        assert not os.path.exists(str(tmp_path / "fig_pmd.png"))

    def test_schema_mismatch_rejected(self, pmd_spec, tmp_path):
        spec = load_spec(pmd_spec)
        with open(spec.inputs["cs"], "w") as fh:
            fh.write("x,y,z\n1,2,3\n")
        with pytest.raises(FigureError, match="schema"):
            render_pmd_panels(spec)

    def test_rerender_pixel_identical(self, pmd_spec):
        spec = load_spec(pmd_spec)
        first = render_pmd_panels(spec)
        blobs = {}
        for path in first:
            with open(path, "rb") as fh:
                blobs[path] = fh.read()
        second = render_pmd_panels(spec)
        for path in second:
            with open(path, "rb") as fh:
                assert fh.read() == blobs[path]


class TestScalingPanels:
    def test_renders(self, scaling_spec):
        spec = load_spec(scaling_spec)
        written = render_scaling_panels(spec)
        assert len(written) == 2

    def test_rerender_pixel_identical(self, scaling_spec):
        spec = load_spec(scaling_spec)
        first = render_scaling_panels(spec)
        blobs = {}
        for path in first:
            with open(path, "rb") as fh:
                blobs[path] = fh.read()
        for path in render_scaling_panels(spec):
            with open(path, "rb") as fh:
                assert fh.read() == blobs[path]

    def test_requires_at_least_one_input(self, tmp_path):
        spec = FigureSpec(
            kind="scaling_panels", inputs={}, output_path=str(tmp_path / "x")
        )
        with pytest.raises(FigureError):
            render_scaling_panels(spec)


class TestCli:
    def test_success(self, pmd_spec, capsys):
        assert main(["--spec", pmd_spec]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 2

    def test_missing_spec(self):
        assert main(["--spec", "/no/such/spec.json"]) == 1

    def test_missing_input_exits_nonzero(self, pmd_spec):
        spec = load_spec(pmd_spec)
        os.remove(spec.inputs["as"])
        assert main(["--spec", pmd_spec]) == 1
