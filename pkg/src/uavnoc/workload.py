"""Quadrotor rotor mixer and a PD-control step emitted as an IR trace.

The mixer maps squared rotor speeds to total thrust and body torques::

    [T ]   [ -b   -b    -b   -b ] [w1^2]
    [Gx] = [  0  -d*b   0   d*b ] [w2^2]
    [Gy]   [-d*b  0    d*b   0  ] [w3^2]
    [Gz]   [  k   -k    k   -k  ] [w4^2]

Signs follow the matrix above as written, so positive rotor speeds give a
negative thrust.

The trace generator unrolls an illustrative attitude/altitude PD step (gains
drawn from ``seed``) followed by the inverse mixer. It exists to produce a
realistic dependency shape, not a flight-worthy controller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXES = ("roll", "pitch", "yaw", "alt")


@dataclass(frozen=True)
class QuadParams:
    b: float = 1.0   # lift constant
    d: float = 1.0   # rotor-to-centre distance
    k: float = 1.0   # secondary lift constant

    def __post_init__(self):
        if not (self.b > 0 and self.d > 0 and self.k > 0):
            raise ValueError("b, d and k must be positive")


@dataclass(frozen=True)
class RotorCommand:
    omega_sq: np.ndarray
    feasible: bool = True


def mixer_matrix(params: QuadParams) -> np.ndarray:
    b, d, k = params.b, params.d, params.k
    return np.array(
        [
            [-b, -b, -b, -b],
            [0.0, -d * b, 0.0, d * b],
            [-d * b, 0.0, d * b, 0.0],
            [k, -k, k, -k],
        ]
    )


def mixer(omega_sq, params: QuadParams) -> tuple[float, np.ndarray]:
    """Thrust and 3-vector torque produced by the squared rotor speeds."""
    out = mixer_matrix(params) @ np.asarray(omega_sq, dtype=float)
    return float(out[0]), out[1:]


def inverse_mixer(thrust: float, torque, params: QuadParams, tol: float = 1e-12) -> RotorCommand:
    """Squared rotor speeds producing ``(thrust, torque)``.

    A solution with a negative component cannot be realised by spinning
    rotors and is returned with ``feasible=False``.
    """
    rhs = np.concatenate([[thrust], np.asarray(torque, dtype=float)])
    try:
        w = np.linalg.solve(mixer_matrix(params), rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("mixer matrix is singular") from exc
    return RotorCommand(w, feasible=bool(np.all(w >= -tol)))


def _lit(x: float) -> str:
    return f"{x:.6e}"


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.n = 0

    def reg(self) -> str:
        self.n += 1
        return f"%r{self.n}"

    def op(self, text: str) -> str:
        r = self.reg()
        self.lines.append(f"{r} = {text}")
        return r


def _emit_step(em: _Emitter, gains, minv: np.ndarray, mass: float, step: int) -> None:
    u = []
    for i, axis in enumerate(AXES):
        kp, kd = gains[i]
        sp = em.op(f"load double, double* %sp{i}, align 8")
        meas = em.op(f"load double, double* %ms{i}, align 8")
        err = em.op(f"fsub double {sp}, {meas}")
        prev = em.op(f"load double, double* %pe{i}, align 8")
        derr = em.op(f"fsub double {err}, {prev}")
        p = em.op(f"fmul double {err}, {_lit(kp)}")
        dterm = em.op(f"fmul double {derr}, {_lit(kd)}")
        ui = em.op(f"fadd double {p}, {dterm}")
        if axis == "alt":
            ui = em.op(f"fdiv double {ui}, {_lit(mass)}")
        em.lines.append(f"store double {err}, double* %pe{i}, align 8")
        u.append(ui)
    # inverse mixer: each rotor command is a linear combination of the PD outputs
    rotors = []
    for r in range(4):
        acc = None
        for j in range(4):
            if minv[r, j] == 0.0:
                continue
            term = em.op(f"fmul double {u[j]}, {_lit(minv[r, j])}")
            acc = term if acc is None else em.op(f"fadd double {acc}, {term}")
        em.lines.append(f"store double {acc}, double* %w{r}, align 8")
        rotors.append(acc)
    sat = em.op(f"fcmp olt double {rotors[0]}, 0.0")
    em.lines.append(f"br i1 {sat}, label %clamp{step}, label %next{step}")


def gen_pd_trace(steps: int, seed: int = 0, params: QuadParams | None = None) -> str:
    """Unrolled PD + inverse-mixer trace; identical ``seed`` gives identical text."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    params = params or QuadParams()
    rng = np.random.default_rng(seed)
    gains = [(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.05, 0.5))) for _ in AXES]
    mass = float(rng.uniform(0.8, 1.5))
    minv = np.linalg.inv(mixer_matrix(params))
    minv[np.abs(minv) < 1e-12] = 0.0
    em = _Emitter()
    for step in range(steps):
        _emit_step(em, gains, minv, mass, step)
    return "\n".join(em.lines) + "\n"
