"""Rigid transforms in SE(2) and SE(3) and their adjoint matrices.

Tangent vectors are ordered translation first, rotation last: ``(rho, omega)``
with ``len == 3`` for SE(2) and ``len == 6`` for SE(3). Quaternions are stored
as ``(w, x, y, z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_QUAT_TOL = 1e-9
# log() refuses rotations closer than this to pi
_PI_MARGIN = 1e-6
_SMALL_ANGLE = 1e-8
# below this angle the series forms are more accurate than the closed forms
_SERIES_ANGLE = 1e-2


class IllConditionedLogError(ValueError):
    """Raised when log() is asked for a rotation too close to pi."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    theta = float(theta)
    if -math.pi < theta <= math.pi:
        return theta
    theta = math.fmod(theta + math.pi, 2.0 * math.pi)
    if theta <= 0.0:
        theta += 2.0 * math.pi
    return theta - math.pi


def _normalize_quat(q) -> tuple[float, float, float, float]:
    q = np.asarray(q, dtype=float).reshape(4)
    norm = float(np.linalg.norm(q))
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("quaternion must be finite and nonzero")
    # leave already-unit quaternions bit-identical so file round trips are exact
    if abs(norm - 1.0) > 4 * np.finfo(float).eps:
        q = q / norm
    return tuple(float(v) for v in q)


def _quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def skew(v) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


@dataclass(frozen=True)
class Pose:
    """An element of SE(2) or SE(3).

    ``rotation`` holds ``(theta,)`` for 2D and a unit quaternion ``(w, x, y, z)``
    for 3D. Use :meth:`se2` / :meth:`se3` rather than the raw constructor.
    """

    translation: tuple[float, ...]
    rotation: tuple[float, ...]

    def __post_init__(self):
        if len(self.translation) == 2 and len(self.rotation) == 1:
            object.__setattr__(self, "rotation", (wrap_angle(self.rotation[0]),))
        elif len(self.translation) == 3 and len(self.rotation) == 4:
            object.__setattr__(self, "rotation", _normalize_quat(self.rotation))
        else:
            raise ValueError(
                f"invalid pose layout: {len(self.translation)} translation, "
                f"{len(self.rotation)} rotation components"
            )
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))

    @classmethod
    def se2(cls, x: float, y: float, theta: float) -> Pose:
        return cls((x, y), (theta,))

    @classmethod
    def se3(cls, translation, quat_wxyz) -> Pose:
        return cls(tuple(translation), tuple(quat_wxyz))

    @classmethod
    def identity(cls, dim: int) -> Pose:
        if dim == 2:
            return cls.se2(0.0, 0.0, 0.0)
        if dim == 3:
            return cls.se3((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))
        raise ValueError(f"dimension must be 2 or 3, got {dim}")

    @property
    def dim(self) -> int:
        return len(self.translation)

    @property
    def ell(self) -> int:
        """Tangent-space dimension: 3 for SE(2), 6 for SE(3)."""
        return 3 if self.dim == 2 else 6

    @property
    def theta(self) -> float:
        if self.dim != 2:
            raise AttributeError("theta is only defined for 2D poses")
        return self.rotation[0]

    @property
    def quat(self) -> tuple[float, float, float, float]:
        if self.dim != 3:
            raise AttributeError("quat is only defined for 3D poses")
        return self.rotation

    def rotation_matrix(self) -> np.ndarray:
        if self.dim == 2:
            c, s = math.cos(self.theta), math.sin(self.theta)
            return np.array([[c, -s], [s, c]])
        return quat_to_matrix(self.rotation)

    def matrix(self) -> np.ndarray:
        """Homogeneous (dim+1)x(dim+1) matrix."""
        d = self.dim
        out = np.eye(d + 1)
        out[:d, :d] = self.rotation_matrix()
        out[:d, d] = self.translation
        return out

    def __matmul__(self, other: Pose) -> Pose:
        return compose(self, other)


def compose(a: Pose, b: Pose) -> Pose:
    """Group product ``a * b``."""
    if a.dim != b.dim:
        raise ValueError(f"cannot compose {a.dim}D and {b.dim}D poses")
    t = np.asarray(a.translation) + a.rotation_matrix() @ np.asarray(b.translation)
    if a.dim == 2:
        return Pose((t[0], t[1]), (a.theta + b.theta,))
    return Pose(tuple(t), _quat_mul(a.rotation, b.rotation))


def inverse(a: Pose) -> Pose:
    rt = a.rotation_matrix().T
    t = -(rt @ np.asarray(a.translation))
    if a.dim == 2:
        return Pose((t[0], t[1]), (-a.theta,))
    w, x, y, z = a.rotation
    return Pose(tuple(t), (w, -x, -y, -z))


def adjoint(a: Pose) -> np.ndarray:
    """Adjoint matrix, mapping ``v`` to the twist of ``a exp(v) a^-1``.

    With translation-first ordering this is ``[[R, [t]x R], [0, R]]`` in 3D and
    ``[[R, (ty, -tx)^T], [0, 1]]`` in 2D.
    """
    r = a.rotation_matrix()
    if a.dim == 2:
        x, y = a.translation
        out = np.eye(3)
        out[:2, :2] = r
        out[0, 2] = y
        out[1, 2] = -x
        return out
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[:3, 3:] = skew(a.translation) @ r
    out[3:, 3:] = r
    return out


def _so3_exp(phi) -> tuple[float, float, float, float]:
    theta = float(np.linalg.norm(phi))
    if theta < _SMALL_ANGLE:
        half = 0.5 - theta * theta / 48.0
        w = 1.0 - theta * theta / 8.0
    else:
        half = math.sin(theta / 2.0) / theta
        w = math.cos(theta / 2.0)
    return (w, half * phi[0], half * phi[1], half * phi[2])


def exp_map(v) -> Pose:
    """Exponential map from a tangent vector of length 3 (SE(2)) or 6 (SE(3))."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 3:
        rho, w = v[:2], v[2]
        if abs(w) < _SMALL_ANGLE:
            a, b = 1.0 - w * w / 6.0, w / 2.0
        else:
            a, b = math.sin(w) / w, 2.0 * math.sin(w / 2.0) ** 2 / w
        t = np.array([[a, -b], [b, a]]) @ rho
        return Pose((t[0], t[1]), (w,))
    if v.size == 6:
        rho, phi = v[:3], v[3:]
        return Pose(tuple(_left_jacobian(phi) @ rho), _so3_exp(phi))
    raise ValueError(f"tangent vector must have length 3 or 6, got {v.size}")


def _left_jacobian(phi) -> np.ndarray:
    theta = float(np.linalg.norm(phi))
    k = skew(phi)
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        b = 2.0 * math.sin(theta / 2.0) ** 2 / t2
        c = (theta - math.sin(theta)) / (t2 * theta)
    return np.eye(3) + b * k + c * (k @ k)


def log_map(a: Pose) -> np.ndarray:
    """Inverse of :func:`exp_map` for rotations bounded away from pi."""
    if a.dim == 2:
        w = a.theta
        if abs(w) > math.pi - _PI_MARGIN:
            raise IllConditionedLogError(f"rotation angle {w} too close to pi")
        if abs(w) < _SMALL_ANGLE:
            s, c = 1.0 - w * w / 6.0, w / 2.0
        else:
            s, c = math.sin(w) / w, 2.0 * math.sin(w / 2.0) ** 2 / w
        rho = np.linalg.solve(np.array([[s, -c], [c, s]]), np.asarray(a.translation))
        return np.array([rho[0], rho[1], w])

    qw, qx, qy, qz = a.rotation
    if qw < 0:
        qw, qx, qy, qz = -qw, -qx, -qy, -qz
    xyz = np.array([qx, qy, qz])
    s = float(np.linalg.norm(xyz))
    theta = 2.0 * math.atan2(s, qw)
    if theta > math.pi - _PI_MARGIN:
        raise IllConditionedLogError(f"rotation angle {theta} too close to pi")
    if s < _SMALL_ANGLE:
        phi = 2.0 * xyz / qw
    else:
        phi = theta / s * xyz
    k = skew(phi)
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        coeff = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        coeff = (1.0 - theta * math.sin(theta) / (4.0 * math.sin(theta / 2.0) ** 2)) / theta**2
    v_inv = np.eye(3) - 0.5 * k + coeff * (k @ k)
    return np.concatenate([v_inv @ np.asarray(a.translation), phi])
