"""Newline-delimited JSON control protocol around Env, over stdio or TCP.

One session per connection, one Env per session. Clients drive it with
{"cmd": "config" | "reset" | "step" | "close"}; replies are single-line JSON
objects with "ok" first, so transcripts are byte-stable for a fixed command
sequence. Errors never kill the session (transport loss aside).
"""

import dataclasses
import json
import socketserver
import sys

import numpy as np

from .config import CollisionRule
from .env import Env, EnvConfig, RANDOMIZE_FIXED, RANDOMIZE_RANDOMIZED
from .state import Vec2

ERR_UNKNOWN_CMD = "unknown_cmd"
ERR_MALFORMED = "malformed"
ERR_NOT_RESET = "not_reset"
ERR_EPISODE_DONE = "episode_done"
ERR_BAD_ACTION = "bad_action"

_RULES = {1: CollisionRule.RULE1, 2: CollisionRule.RULE2, 3: CollisionRule.RULE3}


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _ok(**fields) -> str:
    out = {"ok": True}
    out.update(fields)
    return _dumps(out)


def _err(code: str) -> str:
    return _dumps({"ok": False, "error": code})


def _obs_list(observation) -> list:
    return [float(v) for v in observation.as_vector()]


class ProtocolSession:
    """Line-in, line-out protocol state machine; transport-agnostic."""

    def __init__(self, env_cfg: EnvConfig):
        self.env_cfg = env_cfg
        self.env = Env(env_cfg)
        self.was_reset = False
        self.closed = False

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except ValueError:
            return _err(ERR_MALFORMED)
        if not isinstance(msg, dict) or "cmd" not in msg:
            return _err(ERR_MALFORMED)
        cmd = msg["cmd"]
        if cmd == "config":
            return self._do_config(msg)
        if cmd == "reset":
            return self._do_reset(msg)
        if cmd == "step":
            return self._do_step(msg)
        if cmd == "close":
            self.closed = True
            return _ok()
        return _err(ERR_UNKNOWN_CMD)

    def _do_config(self, msg) -> str:
        try:
            changes = {}
            if "rule" in msg:
                base = dataclasses.replace(
                    self.env_cfg.base, collision_rule=_RULES[int(msg["rule"])]
                )
                changes["base"] = base
            if "randomize" in msg:
                mode = str(msg["randomize"])
                if mode not in (RANDOMIZE_FIXED, RANDOMIZE_RANDOMIZED):
                    return _err(ERR_MALFORMED)
                changes["randomize"] = mode
            if "fixed_initials" in msg:
                changes["fixed_initials"] = np.asarray(
                    msg["fixed_initials"], dtype=float
                )
            if "fixed_jammer" in msg:
                jx, jy = msg["fixed_jammer"]
                changes["fixed_jammer"] = Vec2(float(jx), float(jy))
            if "reward_scale" in msg:
                changes["reward_scale"] = float(msg["reward_scale"])
            if "jammer_x_range" in msg:
                lo, hi = msg["jammer_x_range"]
                changes["jammer_x_range"] = (float(lo), float(hi))
            if "jammer_y_range" in msg:
                lo, hi = msg["jammer_y_range"]
                changes["jammer_y_range"] = (float(lo), float(hi))
            env_cfg = dataclasses.replace(self.env_cfg, **changes)
        except (KeyError, TypeError, ValueError):
            return _err(ERR_MALFORMED)
        self.env_cfg = env_cfg
        self.env = Env(env_cfg)
        self.was_reset = False
        return _ok()

    def _do_reset(self, msg) -> str:
        try:
            seed = int(msg.get("seed", 0))
        except (TypeError, ValueError):
            return _err(ERR_MALFORMED)
        obs = self.env.reset(seed)
        self.was_reset = True
        return _ok(obs=_obs_list(obs))

    def _do_step(self, msg) -> str:
        if not self.was_reset:
            return _err(ERR_NOT_RESET)
        if self.env.done:
            return _err(ERR_EPISODE_DONE)
        action = msg.get("action")
        n2 = 2 * self.env_cfg.base.num_uavs
        if (
            not isinstance(action, list)
            or len(action) != n2
            or not all(isinstance(v, (int, float)) for v in action)
        ):
            return _err(ERR_BAD_ACTION)
        result = self.env.step(action)
        info = {
            "fitness": float(result.info["fitness"]),
            "slot": int(result.info["slot"]),
            "violation": result.info["violation"],
        }
        return _ok(
            obs=_obs_list(result.observation),
            reward=result.reward,
            done=result.done,
            info=info,
        )


def serve_stdio(env_cfg: EnvConfig, stdin=None, stdout=None) -> None:
    """One session over stdin/stdout; returns on close or EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = ProtocolSession(env_cfg)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()
        if session.closed:
            break


class _TcpHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = ProtocolSession(self.server.env_cfg)
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            reply = session.handle_line(line) + "\n"
            self.wfile.write(reply.encode("utf-8"))
            self.wfile.flush()
            if session.closed:
                break


class TcpEnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, env_cfg: EnvConfig):
        super().__init__(address, _TcpHandler)
        self.env_cfg = env_cfg


def serve_tcp(env_cfg: EnvConfig, port: int, host: str = "127.0.0.1") -> None:
    """Serve sessions until interrupted; each connection is independent."""
    with TcpEnvServer((host, port), env_cfg) as server:
        server.serve_forever()
