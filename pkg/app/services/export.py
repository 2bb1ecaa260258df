"""
File outputs: OBJ meshes of a 3-D projection, CSV field tables and the
JSON-lines validation report.
"""
import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import trimesh

from app.services.geometry import CurvatureField, is_maximal_slice
from app.services.weierstrass import SampledSurface

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    ["u", "v", "F0", "F1", "F2", "F3", "lambda2", "K_closed", "K_numeric"]
    + [f"tau{k}" for k in range(4)]
    + [f"nu{k}" for k in range(4)]
    + ["is_planar"]
)


def default_projection(theta: float) -> tuple[int, int, int]:
    """
    Coordinates kept in the OBJ: x3 is dropped on the maximal slice, x0
    otherwise (constant on the Euclidean slice, exported in the CSV).
    """
    if is_maximal_slice(theta):
        return (0, 1, 2)
    return (1, 2, 3)


def grid_faces(nu: int, nv: int) -> np.ndarray:
    """Two triangles per grid quad; vertex (i, j) has index i * nv + j."""
    i, j = np.meshgrid(np.arange(nu - 1), np.arange(nv - 1), indexing="ij")
    v00 = (i * nv + j).ravel()
    v10 = v00 + nv
    v01 = v00 + 1
    v11 = v10 + 1
    lower = np.stack([v00, v10, v11], axis=-1)
    upper = np.stack([v00, v11, v01], axis=-1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def surface_mesh(surface: SampledSurface, projection: tuple[int, int, int] | None = None) -> trimesh.Trimesh:
    projection = projection or default_projection(surface.theta)
    nu, nv = surface.shape
    vertices = surface.points[..., list(projection)].reshape(-1, 3)
    return trimesh.Trimesh(vertices=vertices, faces=grid_faces(nu, nv), process=False, validate=False)


def write_obj(surface: SampledSurface, path: Path, projection: tuple[int, int, int] | None = None) -> Path:
    mesh = surface_mesh(surface, projection)
    text = mesh.export(file_type="obj", include_normals=False, include_color=False, include_texture=False)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"OBJ written: {path} ({len(mesh.vertices)} vertices, {len(mesh.faces)} faces)")
    return path


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return repr(float(value))


def write_csv(surface: SampledSurface, curvature: CurvatureField, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nu, nv = surface.shape
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i in range(nu):
            for j in range(nv):
                node = surface.w[i, j]
                row = [node.real, node.imag, *surface.points[i, j], surface.lambda2[i, j],
                       curvature.k_closed[i, j], curvature.k_numeric[i, j],
                       *surface.tau[i, j], *surface.nu[i, j], bool(curvature.is_planar[i, j])]
                writer.writerow([_cell(value) for value in row])
    logger.info(f"CSV written: {path} ({nu * nv} rows)")
    return path


@dataclass(frozen=True)
class CheckResult:
    check: str
    worst_value: float
    tolerance: float
    passed: bool
    worst_node: complex | None = None
    theta: float | None = None

    def to_record(self) -> dict:
        record = asdict(self)
        record["worst_value"] = float(record["worst_value"])
        record["tolerance"] = float(record["tolerance"])
        record["pass"] = bool(record.pop("passed"))
        node = record.pop("worst_node")
        record["worst_node"] = None if node is None else [float(node.real), float(node.imag)]
        return {key: record[key] for key in ("check", "worst_value", "tolerance", "pass", "worst_node", "theta")}


def write_report(results: list[CheckResult], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for result in results:
            handle.write(json.dumps(result.to_record()) + "\n")
    logger.info(f"Report written: {path} ({len(results)} checks)")
    return path
