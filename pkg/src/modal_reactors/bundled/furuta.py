"""Simulated Furuta pendulum driven by the bundled controller.

The arm is commanded by its angular acceleration ``u``. With the pendulum
angle ``theta`` measured from upright, the model is

    phi''   = u
    theta'' = (g / l) sin(theta) - (r / l) u cos(theta)

integrated with forward Euler at a fixed step. The command is held
constant between sensor samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STEP_NS = 1_000_000


def wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


@dataclass
class Plant:
    g: float = 9.81
    length: float = 0.3
    arm: float = 0.2
    # phi, dphi, theta, dtheta
    x: list[float] = field(default_factory=lambda: [0.0, 0.0, math.pi - 0.1, 0.0])
    u: float = 0.0
    now_ns: int = 0

    def step(self) -> None:
        phi, dphi, th, dth = self.x
        dt = STEP_NS / 1e9
        ddth = self.g / self.length * math.sin(th) - self.arm / self.length * self.u * math.cos(th)
        self.x = [phi + dt * dphi, dphi + dt * self.u, th + dt * dth, dth + dt * ddth]
        self.now_ns += STEP_NS

    def advance_to(self, t_ns: int) -> None:
        while self.now_ns < t_ns:
            self.step()

    def measure(self) -> tuple[float, float, float, float]:
        phi, dphi, th, dth = self.x
        return (wrap(phi), dphi, wrap(th), dth)


def bind(plant: Plant) -> dict:
    def sensor(ctx) -> None:
        plant.advance_to(ctx.tag.time)
        ctx.set("angles", plant.measure())

    def actuate(ctx) -> None:
        plant.u = ctx.get("control")

    return {"furuta_sensor": sensor, "furuta_actuate": actuate}
