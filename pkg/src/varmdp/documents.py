"""JSON document formats for MDP and Markov-reward-process instances.

Schema ``mdp-v1``: fields ``horizon``, ``states`` (names), ``actions``
(per-state lists, order defines the argmax tie-break), ``reward_kind``
("sas" or "sa"), ``transitions`` (list of ``{x, a, y, p, r}`` with state
names), ``mu0`` and ``salvage`` (aligned with ``states``).  All numerics
are decimal strings ("0.25"), ratio strings ("1/4") or integers and are
stored exactly.  For ``reward_kind = "sa"`` the ``r`` of every
transition in one ``(x, a)`` group must agree (it is the state-action
reward, repeated per row).

Schema ``mrp-v1``: ``horizon``, ``states``, ``reward_on`` ("state" or
"transition"), ``transitions`` (``{x, y, p}`` plus ``r`` when
transition-rewarded), ``state_rewards`` (when state-rewarded), ``mu0``,
optional ``salvage`` and ``include_final_reward``.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import ValidationError
from .mdp import FiniteMdp, MarkovRewardProcess, ZERO
from .rationals import format_rational, parse_rational

MDP_SCHEMA = "mdp-v1"
MRP_SCHEMA = "mrp-v1"


def _require(doc: dict, field: str):
    if field not in doc:
        raise ValidationError(f"document: missing field {field!r}")
    return doc[field]


def _state_index(names: tuple[str, ...], name, field: str) -> int:
    try:
        return names.index(str(name))
    except ValueError:
        raise ValidationError(f"{field}: unknown state {name!r}") from None


def _aligned_rationals(doc: dict, field: str, n: int) -> tuple[Fraction, ...]:
    raw = _require(doc, field)
    if not isinstance(raw, list) or len(raw) != n:
        raise ValidationError(f"{field}: expected a list aligned with states")
    return tuple(parse_rational(v, f"{field}[{i}]") for i, v in enumerate(raw))


def mdp_from_document(doc: dict) -> FiniteMdp:
    if not isinstance(doc, dict):
        raise ValidationError("document: expected a JSON object")
    states = tuple(str(s) for s in _require(doc, "states"))
    n = len(states)
    raw_actions = _require(doc, "actions")
    if not isinstance(raw_actions, list) or len(raw_actions) != n:
        raise ValidationError("actions: expected one action list per state")
    actions = tuple(tuple(acts) for acts in raw_actions)
    reward_kind = _require(doc, "reward_kind")
    rows = _require(doc, "transitions")
    if not isinstance(rows, list) or not rows:
        raise ValidationError("transitions: expected a nonempty list")
    kernel_acc: dict = {}
    sas: dict = {}
    sa: dict = {}
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ValidationError(f"transitions[{i}]: expected an object")
        x = _state_index(states, _require(row, "x"), f"transitions[{i}].x")
        y = _state_index(states, _require(row, "y"), f"transitions[{i}].y")
        a = _require(row, "a")
        if a not in actions[x]:
            raise ValidationError(
                f"transitions[{i}]: action {a!r} not declared at state {states[x]}")
        p = parse_rational(_require(row, "p"), f"transitions[{i}].p")
        r = parse_rational(_require(row, "r"), f"transitions[{i}].r")
        if (x, a, y) in sas:
            raise ValidationError(f"transitions[{i}]: duplicate (x, a, y) entry")
        kernel_acc.setdefault((x, a), []).append((y, p))
        sas[(x, a, y)] = r
        if reward_kind == "sa":
            if (x, a) in sa and sa[(x, a)] != r:
                raise ValidationError(
                    f"transitions[{i}].r: state-action reward differs within group "
                    f"({states[x]}, {a!r})")
            sa[(x, a)] = r
    kernel = {key: tuple(sorted(rows_)) for key, rows_ in kernel_acc.items()}
    return FiniteMdp(
        horizon=int(_require(doc, "horizon")),
        states=states,
        actions=actions,
        kernel=kernel,
        reward_kind=reward_kind,
        sas_reward=sas if reward_kind == "sas" else None,
        sa_reward=sa if reward_kind == "sa" else None,
        mu0=_aligned_rationals(doc, "mu0", n),
        salvage=_aligned_rationals(doc, "salvage", n),
    )


def mdp_to_document(mdp: FiniteMdp) -> dict:
    transitions = []
    for x in range(mdp.n_states):
        for a in mdp.actions[x]:
            for y, p in mdp.transitions(x, a):
                transitions.append({
                    "x": mdp.states[x], "a": a, "y": mdp.states[y],
                    "p": format_rational(p),
                    "r": format_rational(mdp.reward(x, a, y)),
                })
    return {
        "schema": MDP_SCHEMA,
        "horizon": mdp.horizon,
        "states": list(mdp.states),
        "actions": [list(acts) for acts in mdp.actions],
        "reward_kind": mdp.reward_kind,
        "transitions": transitions,
        "mu0": [format_rational(p) for p in mdp.mu0],
        "salvage": [format_rational(v) for v in mdp.salvage],
    }


def mrp_from_document(doc: dict) -> MarkovRewardProcess:
    if not isinstance(doc, dict):
        raise ValidationError("document: expected a JSON object")
    states = tuple(str(s) for s in _require(doc, "states"))
    n = len(states)
    reward_on = _require(doc, "reward_on")
    rows = _require(doc, "transitions")
    if not isinstance(rows, list) or not rows:
        raise ValidationError("transitions: expected a nonempty list")
    kernel = [[ZERO] * n for _ in range(n)]
    trans_reward: dict = {}
    for i, row in enumerate(rows):
        x = _state_index(states, _require(row, "x"), f"transitions[{i}].x")
        y = _state_index(states, _require(row, "y"), f"transitions[{i}].y")
        if kernel[x][y] != 0:
            raise ValidationError(f"transitions[{i}]: duplicate (x, y) entry")
        kernel[x][y] = parse_rational(_require(row, "p"), f"transitions[{i}].p")
        if reward_on == "transition":
            trans_reward[(x, y)] = parse_rational(_require(row, "r"),
                                                  f"transitions[{i}].r")
    state_reward = None
    if reward_on == "state":
        state_reward = _aligned_rationals(doc, "state_rewards", n)
    salvage = None
    if doc.get("salvage") is not None:
        salvage = _aligned_rationals(doc, "salvage", n)
    return MarkovRewardProcess(
        horizon=int(_require(doc, "horizon")),
        states=states,
        kernel=tuple(tuple(row) for row in kernel),
        reward_on=reward_on,
        state_reward=state_reward,
        transition_reward=trans_reward if reward_on == "transition" else None,
        mu0=_aligned_rationals(doc, "mu0", n),
        salvage=salvage,
        include_final_reward=bool(doc.get("include_final_reward", False)),
    )


def mrp_to_document(mrp: MarkovRewardProcess) -> dict:
    transitions = []
    for x in range(mrp.n_states):
        for y, p in mrp.successors(x):
            row = {"x": mrp.states[x], "y": mrp.states[y], "p": format_rational(p)}
            if mrp.reward_on == "transition":
                row["r"] = format_rational(mrp.transition_reward[(x, y)])
            transitions.append(row)
    doc = {
        "schema": MRP_SCHEMA,
        "horizon": mrp.horizon,
        "states": list(mrp.states),
        "reward_on": mrp.reward_on,
        "transitions": transitions,
        "mu0": [format_rational(p) for p in mrp.mu0],
    }
    if mrp.reward_on == "state":
        doc["state_rewards"] = [format_rational(r) for r in mrp.state_reward]
    if mrp.salvage is not None:
        doc["salvage"] = [format_rational(v) for v in mrp.salvage]
    if mrp.include_final_reward:
        doc["include_final_reward"] = True
    return doc


def load_document(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"document: invalid JSON ({exc})") from exc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
