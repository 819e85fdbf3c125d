"""Role assignment and reference-target selection for the V-shape and
flocking modes, plus the safe-distance collision override.

Everything here is a pure function of one step's detection snapshot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from .kinematics import Detection, Pose, Twist, detection_to_relative, wrap_angle


class Side(Enum):
    LEADER = "leader"
    LEFT = "left"
    RIGHT = "right"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class Role:
    side: Side
    source_id: int | None = None
    # Relay depth of the role: 0 for the leader, 1 for robots that see it
    # directly, source's depth + 1 down the cascade. Unassigned robots
    # carry no depth (None).
    hop: int | None = None


class FormationMode(Enum):
    V_SHAPE = "v_shape"
    FLOCKING = "flocking"


# Under x_d = x_t - l_d cos(theta_t + phi_d), a positive phi_d rotates
# the rear slot toward the target's right; the left wing therefore
# carries the negative bearing.
DEFAULT_PHI_LEFT = -math.pi / 4.0
DEFAULT_PHI_RIGHT = math.pi / 4.0


@dataclass(frozen=True)
class FormationSpec:
    l_d: float = 1.0
    phi_left: float = DEFAULT_PHI_LEFT
    phi_right: float = DEFAULT_PHI_RIGHT
    mode: FormationMode = FormationMode.V_SHAPE


def _side_of_leader(det: Detection, own_heading: float) -> Side:
    """LEFT if the detector sits in the leader's left half-plane."""
    # Detector -> leader in the world frame, from the body-frame detection.
    rx, ry = detection_to_relative(det)
    c, s = math.cos(own_heading), math.sin(own_heading)
    wx = c * rx - s * ry
    wy = s * rx + c * ry
    # Leader -> detector, rotated into the leader's frame.
    cl, sl = math.cos(det.heading), math.sin(det.heading)
    y_rel = sl * wx - cl * wy
    return Side.LEFT if y_rel > 0.0 else Side.RIGHT


def assign_roles(detections: Mapping[int, Sequence[Detection]],
                 headings: Mapping[int, float],
                 leader_id: int) -> dict[int, Role]:
    """Cascade role assignment over one step's detection graph.

    Robots that see the leader side themselves directly; the rest copy
    the nearest role-carrying neighbor, propagating round by round until
    fixpoint. Robots with no assigned neighbor stay UNASSIGNED.
    """
    roles: dict[int, Role] = {leader_id: Role(Side.LEADER, hop=0)}
    for rid in sorted(detections):
        if rid == leader_id:
            continue
        for det in detections[rid]:
            if det.id == leader_id:
                roles[rid] = Role(_side_of_leader(det, headings[rid]),
                                  leader_id, hop=1)
                break

    pending = sorted(r for r in detections if r != leader_id and r not in roles)
    for _ in range(len(pending)):
        if not pending:
            break
        assigned_now: dict[int, Role] = {}
        for rid in pending:
            candidates = [
                d for d in detections[rid]
                if roles.get(d.id, Role(Side.UNASSIGNED)).side in (Side.LEFT, Side.RIGHT)
            ]
            if candidates:
                nearest = min(candidates, key=lambda d: (d.range, d.id))
                src = roles[nearest.id]
                assigned_now[rid] = Role(src.side, nearest.id, hop=src.hop + 1)
        if not assigned_now:
            break
        roles.update(assigned_now)
        pending = [r for r in pending if r not in assigned_now]

    for rid in detections:
        roles.setdefault(rid, Role(Side.UNASSIGNED))
    return roles


def _world_pose_of(robot: Pose, det: Detection) -> Pose:
    a = robot.theta + det.bearing
    return Pose(robot.x + det.range * math.cos(a),
                robot.y + det.range * math.sin(a),
                det.heading)


def select_target_detection(role: Role, detections: Sequence[Detection],
                            spec: FormationSpec, own_heading: float = 0.0,
                            ref_heading: float | None = None,
                            own_id: int | None = None,
                            hops: Mapping[int, int | None] | None = None,
                            ) -> Optional[tuple[Detection, float]]:
    """Pick the V-shape target detection: the nearest eligible one on the
    wing side (left half for RIGHT members, right half for LEFT), falling
    back to the nearest eligible detection regardless of side.

    Eligibility keeps the follow graph acyclic. When ``hops`` (relay
    depth per visible robot id) is given, a neighbor is eligible iff its
    (hop, id) pair orders strictly before the detector's own: relay depth
    is discrete and recomputed from the same snapshot for everyone, so
    the ordering cannot flip under positional jitter and two robots can
    never chase each other, not even across successive steps. A robot
    with an assigned role always sees its role source (strictly smaller
    hop), so eligibility alone never leaves it target-less. Without
    ``hops`` the geometric rule applies instead: eligible = strictly
    ahead in the frame of ``ref_heading`` (defaults to the detector's own
    heading).

    Returns (detection, phi_d), or None when no admissible target exists.
    """
    if role.side not in (Side.LEFT, Side.RIGHT):
        raise ValueError(f"cannot select a target for role {role.side}")
    if not detections:
        return None
    if ref_heading is None:
        ref_heading = own_heading
    if role.side is Side.LEFT:
        on_wing_side = lambda y: y < 0.0  # noqa: E731
        phi_d = spec.phi_left
    else:
        on_wing_side = lambda y: y > 0.0  # noqa: E731
        phi_d = spec.phi_right

    rot = own_heading - ref_heading

    def ref_frame(d: Detection) -> tuple[float, float]:
        a = d.bearing + rot
        return d.range * math.cos(a), d.range * math.sin(a)

    if hops is not None:
        own_hop = role.hop if role.hop is not None else math.inf
        own_key = (own_hop, math.inf if own_id is None else own_id)

        def eligible(d: Detection, x: float) -> bool:
            h = hops.get(d.id)
            return h is not None and (h, d.id) < own_key
    else:
        def eligible(d: Detection, x: float) -> bool:
            return x > 0.0

    frames = [(d, ref_frame(d)) for d in detections]
    candidates = [d for d, (x, y) in frames if eligible(d, x)]
    if not candidates:
        return None
    return min(candidates, key=lambda d: (d.range, d.id)), phi_d


def select_target(robot: Pose, role: Role, detections: Sequence[Detection],
                  spec: FormationSpec, ref_heading: float | None = None,
                  own_id: int | None = None,
                  hops: Mapping[int, int | None] | None = None,
                  ) -> Optional[tuple[Pose, float, float]]:
    """Like ``select_target_detection``, but maps the chosen detection to
    its world pose: (target pose, l_d, phi_d)."""
    sel = select_target_detection(role, detections, spec, robot.theta,
                                  ref_heading, own_id, hops)
    if sel is None:
        return None
    det, phi_d = sel
    return _world_pose_of(robot, det), spec.l_d, phi_d


def flocking_reference(robot: Pose, detections: Sequence[Detection],
                       ) -> Optional[tuple[Pose, float, float]]:
    """Flocking reference: centroid of visible members with the circular
    mean of their broadcast headings; distance and bearing unconstrained."""
    if not detections:
        return None
    sx = sy = sc = ss = 0.0
    for d in detections:
        rx, ry = detection_to_relative(d)
        c, s = math.cos(robot.theta), math.sin(robot.theta)
        sx += robot.x + c * rx - s * ry
        sy += robot.y + s * rx + c * ry
        sc += math.cos(d.heading)
        ss += math.sin(d.heading)
    n = len(detections)
    heading = math.atan2(ss, sc)
    return Pose(sx / n, sy / n, wrap_angle(heading)), 0.0, 0.0


def collision_override(twist: Twist, detections: Sequence[Detection],
                       d_s: float, omega_max: float,
                       v_back: float = 0.0) -> Twist:
    """Back off and steer away when a detection ahead is closer than d_s.

    The turn sign opposes the nearest intruder's bearing; a dead-ahead
    intruder breaks the tie toward +omega. Only front-half intruders
    trigger the override, and the robot reverses at v_back while turning
    so the separation actually opens; stopping in place would let the
    tracking controller steer straight back into the blocked heading and
    livelock the pair. Reversing is suppressed (v = 0) whenever a rear
    intruder is also inside d_s.
    """
    if d_s <= 0.0:
        raise ValueError(f"d_s must be > 0, got {d_s}")
    close = [d for d in detections if d.range < d_s]
    intruders = [d for d in close if abs(d.bearing) <= math.pi / 2.0]
    if not intruders:
        return twist
    nearest = min(intruders, key=lambda d: (d.range, d.id))
    omega = -omega_max if nearest.bearing > 0.0 else omega_max
    v = 0.0 if len(close) > len(intruders) else -abs(v_back)
    return Twist(v, omega)
