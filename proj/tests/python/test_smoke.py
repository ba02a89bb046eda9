import math
import os
import pathlib
import tempfile

import numpy as np
import pytest

import wgmodes


def tmp_dir():
    base = os.environ.get("WGM_TEST_TMP_DIR")
    if base:
        p = pathlib.Path(base) / "python"
        p.mkdir(parents=True, exist_ok=True)
        return p
    return pathlib.Path(tempfile.mkdtemp())


@pytest.fixture(scope="module")
def rect16():
    mesh = wgmodes.Mesh.rectangle(1.0, 0.5, 16, 8)
    return mesh, wgmodes.solve(mesh, 6.5, num_modes=12)


def test_mesh_round_trip():
    mesh = wgmodes.Mesh.rectangle(1.0, 0.5, 4, 2)
    assert mesh.num_triangles == 16
    assert mesh.nodes.shape == (mesh.num_nodes, 2)
    assert mesh.triangles.shape == (16, 3)
    assert math.isclose(mesh.area, 0.5)
    again = wgmodes.Mesh.from_text(mesh.serialize())
    assert again.serialize() == mesh.serialize()
    assert again.fingerprint() == mesh.fingerprint()
    assert mesh.refine().num_triangles == 64


def test_parse_error_is_validation():
    with pytest.raises(wgmodes.ValidationError) as info:
        wgmodes.Mesh.from_text("$nodes\n2\n0 0 0\n")
    assert info.value.exit_code == 4
    assert info.value.module == "mesh"


def test_solve_rectangle(rect16):
    _, sol = rect16
    assert len(sol.modes) == 12
    prop = [m for m in sol.modes if m.classification == "propagating"]
    assert len(prop) == 3
    te10 = math.sqrt(wgmodes.rect_beta_sq("TE", 1, 0, 1.0, 0.5, 6.5))
    assert abs(prop[0].beta.real - te10) / te10 < 0.02
    u = prop[0].u
    assert u.dtype == np.complex128 and u.shape == (sol.num_edge_dofs,)
    assert abs(abs(sol.a_orth(u, u)) - 1.0) < 1e-10
    assert all(c["pass"] for c in sol.verify())
    assert [1, 2] in sol.clusters


def test_dtn_pairing_and_round_trip(rect16):
    mesh, sol = rect16
    dtn = sol.build_dtn()
    assert dtn.sign == 1
    assert dtn.N.shape == (sol.num_edge_dofs, sol.num_edge_dofs)
    u = sol.modes[0].u
    pairing = np.vdot(u, dtn.apply(u))
    assert abs(pairing - (-1j / sol.modes[0].beta)) < 1e-8 * abs(sol.modes[0].beta) ** -1
    path = tmp_dir() / "smoke.wgdtn"
    dtn.export(str(path))
    back = wgmodes.import_dtn(str(path), mesh.fingerprint())
    assert np.array_equal(back.N, dtn.N)
    assert back.serialize() == path.read_text()
    with pytest.raises(wgmodes.ValidationError):
        wgmodes.import_dtn(str(path), "0000000000000000")


def test_cutoff_and_io_errors():
    mesh = wgmodes.Mesh.rectangle(1.0, 0.5, 8, 4)
    with pytest.raises(wgmodes.IoError):
        wgmodes.Mesh.read("/nonexistent/file.mesh")
    with pytest.raises(wgmodes.ValidationError):
        wgmodes.solve(mesh, -1.0)
    # a large cutoff tolerance turns any frequency near TM11 into a cutoff
    with pytest.raises(wgmodes.CutoffError):
        wgmodes.solve(mesh, math.pi * math.sqrt(5.0), cutoff_tol=0.2)


def test_analytic_and_convergence():
    modes, nprop = wgmodes.rect_modes(1.0, 0.5, 6.5, count=4)
    assert nprop == 3
    assert modes[0][0] == "TE10"
    labels, rows = wgmodes.convergence(wgmodes.Mesh.rectangle(1.0, 0.5, 8, 4), 6.5, levels=3)
    assert labels[0] == "TE10"
    assert rows[2]["order"][0] >= 1.8


def test_materials():
    mesh = wgmodes.Mesh.rectangle(1.0, 0.5, 8, 4)
    mats = wgmodes.Materials.constants({"0": (2.25, 1.0)})
    sol = wgmodes.solve(mesh, 6.5, materials=mats, num_modes=4)
    te10 = wgmodes.rect_beta_sq("TE", 1, 0, 1.0, 0.5, 6.5, eps=2.25)
    assert abs(sol.modes[0].beta_sq.real - te10) / te10 < 0.05
    with pytest.raises(wgmodes.ValidationError):
        wgmodes.solve(mesh, 6.5, materials=wgmodes.Materials.constants({"core": (1.0, 1.0)}))
