"""Drive the slot-stepping environment over its wire protocol.

One line of JSON in, one line out. The same session object backs the
stdio and TCP servers, so the exchange below is exactly what an external
agent sees. The episode reward ties back to the planner's objective:
sum(rewards) * reward_scale / T equals the epoch objective of the
realized trajectory.
"""

import json

import numpy as np

from nullsteer.config import make_default_config, substream
from nullsteer.env import DEFAULT_REWARD_SCALE, Env, EnvConfig, RANDOMIZE_FIXED
from nullsteer.objective import epoch_objective
from nullsteer.server import ProtocolSession
from nullsteer.state import Vec2

initials = [[12.0, 20.0], [48.0, 20.0], [12.0, 48.0], [48.0, 48.0]]
session = ProtocolSession(EnvConfig())

rng = substream(6, "demo-actions")
script = [
    {"cmd": "config", "randomize": "Fixed", "fixed_initials": initials,
     "fixed_jammer": [30.0, 500.0]},
    {"cmd": "reset", "seed": 6},
]
script += [
    {"cmd": "step", "action": [round(float(v), 3) for v in rng.uniform(-1, 1, 8)]}
    for _ in range(5)
]

for msg in script:
    line = json.dumps(msg)
    reply = session.handle_line(line)
    short = reply if len(reply) <= 100 else reply[:97] + "..."
    print(">> %s" % line[:76])
    print("<< %s" % short)

# replay the same actions against an in-process environment
env = Env(EnvConfig(randomize=RANDOMIZE_FIXED,
                    fixed_initials=np.asarray(initials),
                    fixed_jammer=Vec2(30.0, 500.0)))
env.reset(seed=6)
rng = substream(6, "demo-actions")
total = 0.0
for _ in range(5):
    action = [round(float(v), 3) for v in rng.uniform(-1, 1, 8)]
    total += env.step(action).reward

cfg = make_default_config()
objective = epoch_objective(env.realized_block(), Vec2(30.0, 500.0), cfg).objective
identity = total * DEFAULT_REWARD_SCALE / cfg.scored_slots
print("\nreward sum %.6f  ->  objective %.6e" % (total, identity))
print("epoch objective of realized block: %.6e" % objective)
assert abs(identity - objective) <= 1e-9 * objective
print("identity holds to 1e-9 relative")
