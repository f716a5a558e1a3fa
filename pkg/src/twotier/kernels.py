"""Hot numeric kernels: cart-pole physics, discretization, TD learning.

Everything below is numba ``@njit``-compiled unless the env flag in
:mod:`twotier.accel` selects the pure-Python path (see that module).
Kernels use scalar math and ``Generator.random()`` only, so the two paths
produce bit-identical trajectories from the same seed.

Random draws consumed per episode, in order: four uniforms for the start
state, then one action selection per step (plus one for the next action at
non-terminal steps).  Action selection draws a tie-break uniform only when
several actions share the maximal value, and an exploration uniform only
when epsilon > 0.
"""

import math

from .accel import njit

# Classic cart-pole physics. The task itself fixes only the 12-degree /
# 2.4-unit failure bounds and the reward schedule; the constants below are
# the conventional ones for this system.
GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
TOTAL_MASS = CART_MASS + POLE_MASS
HALF_POLE_LENGTH = 0.5
POLEMASS_LENGTH = POLE_MASS * HALF_POLE_LENGTH
FORCE_MAG = 10.0
DT = 0.02

X_THRESHOLD = 2.4
THETA_THRESHOLD = 12.0 * 2.0 * math.pi / 360.0

STEP_REWARD = 1.0
FAIL_REWARD = -200.0

# Integer codes matching params.Algorithm / params.Policy.
QLEARNING = 0
SARSA = 1
EPSILON_GREEDY = 0
SOFTMAX = 1


@njit
def physics_step(x, x_dot, theta, theta_dot, force):
    """Advance the cart-pole state by one explicit-Euler step of DT seconds.

    ``force`` is the signed horizontal force on the cart in newtons; this is
    the raw dynamics hook, so any value (including 0) is accepted.
    """
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    temp = (force + POLEMASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS
    theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
        HALF_POLE_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t * cos_t / TOTAL_MASS)
    )
    x_acc = temp - POLEMASS_LENGTH * theta_acc * cos_t / TOTAL_MASS
    return (
        x + DT * x_dot,
        x_dot + DT * x_acc,
        theta + DT * theta_dot,
        theta_dot + DT * theta_acc,
    )


@njit
def out_of_bounds(x, theta):
    """Failure test: cart beyond 2.4 units or pole beyond 12 degrees."""
    return (
        x < -X_THRESHOLD or x > X_THRESHOLD or theta < -THETA_THRESHOLD or theta > THETA_THRESHOLD
    )


@njit
def draw_start_state(rng):
    """Uniform start state: each component in [-0.05, 0.05]."""
    x = -0.05 + 0.1 * rng.random()
    x_dot = -0.05 + 0.1 * rng.random()
    theta = -0.05 + 0.1 * rng.random()
    theta_dot = -0.05 + 0.1 * rng.random()
    return x, x_dot, theta, theta_dot


@njit
def bin_index(value, lower, upper, n):
    """Uniform left-closed bin index with clipping to the edge bins."""
    if value <= lower:
        return 0
    if value >= upper:
        return n - 1
    idx = int((value - lower) / (upper - lower) * n)
    if idx > n - 1:
        idx = n - 1
    return idx


@njit
def state_index(x, x_dot, theta, theta_dot, n_bins, n_bins_angle, x_dot_limit, theta_dot_limit):
    """Mixed-radix state id in [0, n_bins^2 * n_bins_angle^2).

    Position and angle are binned over their failure ranges; the unbounded
    velocities are clipped to the configured limits.
    """
    ix = bin_index(x, -X_THRESHOLD, X_THRESHOLD, n_bins)
    ixd = bin_index(x_dot, -x_dot_limit, x_dot_limit, n_bins)
    it = bin_index(theta, -THETA_THRESHOLD, THETA_THRESHOLD, n_bins_angle)
    itd = bin_index(theta_dot, -theta_dot_limit, theta_dot_limit, n_bins_angle)
    return ((ix * n_bins + ixd) * n_bins_angle + it) * n_bins_angle + itd


@njit
def select_action_core(q_row, policy, epsilon, tau, explore_all, rng):
    """Pick an action index from one row of the Q table.

    Epsilon-greedy: the greedy action (ties broken uniformly at random) with
    probability 1 - epsilon, otherwise a uniform draw over the non-greedy
    actions -- unless ``explore_all`` includes the greedy action in the draw.
    Softmax: Boltzmann sampling with max-subtraction for stability.
    """
    n = q_row.shape[0]
    if policy == SOFTMAX:
        q_max = q_row[0]
        for i in range(1, n):
            if q_row[i] > q_max:
                q_max = q_row[i]
        total = 0.0
        for i in range(n):
            total += math.exp((q_row[i] - q_max) / tau)
        u = rng.random() * total
        acc = 0.0
        for i in range(n):
            acc += math.exp((q_row[i] - q_max) / tau)
            if u < acc:
                return i
        return n - 1
    q_max = q_row[0]
    n_max = 1
    for i in range(1, n):
        if q_row[i] > q_max:
            q_max = q_row[i]
            n_max = 1
        elif q_row[i] == q_max:
            n_max += 1
    greedy = 0
    if n_max == 1:
        for i in range(n):
            if q_row[i] == q_max:
                greedy = i
                break
    else:
        k = int(rng.random() * n_max)
        if k > n_max - 1:
            k = n_max - 1
        for i in range(n):
            if q_row[i] == q_max:
                if k == 0:
                    greedy = i
                    break
                k -= 1
    if epsilon > 0.0 and rng.random() < epsilon:
        if explore_all:
            j = int(rng.random() * n)
            if j > n - 1:
                j = n - 1
            return j
        j = int(rng.random() * (n - 1))
        if j > n - 2:
            j = n - 2
        if j >= greedy:
            j += 1
        return j
    return greedy


@njit
def softmax_probabilities(q_row, tau, out):
    """Fill ``out`` with the Boltzmann action distribution for one Q row."""
    n = q_row.shape[0]
    q_max = q_row[0]
    for i in range(1, n):
        if q_row[i] > q_max:
            q_max = q_row[i]
    total = 0.0
    for i in range(n):
        out[i] = math.exp((q_row[i] - q_max) / tau)
        total += out[i]
    for i in range(n):
        out[i] /= total


@njit
def td_step(
    q,
    e,
    active,
    n_active,
    s,
    a,
    reward,
    s_next,
    a_next,
    bootstrap,
    algorithm,
    use_traces,
    watkins_cutoff,
    alpha,
    gamma,
    lam,
):
    """One temporal-difference update for the transition (s, a, reward, s_next, a_next).

    ``bootstrap`` is False on failure (target value 0); on truncation the
    caller passes True so the update bootstraps from the next state.
    ``active`` holds the flat indices of nonzero eligibility entries; the
    updated count is returned.  With ``lam == 0`` the traced update reduces
    to the plain one on the same arithmetic path.
    """
    n_actions = q.shape[1]
    if bootstrap:
        max_next = q[s_next, 0]
        for j in range(1, n_actions):
            if q[s_next, j] > max_next:
                max_next = q[s_next, j]
        if algorithm == SARSA:
            target = q[s_next, a_next]
        else:
            target = max_next
        greedy_next = q[s_next, a_next] == max_next
    else:
        target = 0.0
        greedy_next = True
    delta = reward + gamma * target - q[s, a]
    if math.isnan(delta) or math.isinf(delta):
        raise ValueError("non-finite TD error")
    if not use_traces:
        q[s, a] += alpha * delta
        return n_active
    if e[s, a] == 0.0:
        active[n_active] = s * n_actions + a
        n_active += 1
    e[s, a] = 1.0
    step = alpha * delta
    for i in range(n_active):
        f = active[i]
        q[f // n_actions, f % n_actions] += step * e[f // n_actions, f % n_actions]
    if watkins_cutoff and algorithm == QLEARNING and not greedy_next:
        for i in range(n_active):
            f = active[i]
            e[f // n_actions, f % n_actions] = 0.0
        return 0
    decay = gamma * lam
    kept = 0
    for i in range(n_active):
        f = active[i]
        v = e[f // n_actions, f % n_actions] * decay
        e[f // n_actions, f % n_actions] = v
        if v != 0.0:
            active[kept] = f
            kept += 1
    return kept


@njit
def run_episode_core(
    q,
    e,
    active,
    epsilon,
    rng,
    algorithm,
    use_traces,
    policy,
    epsilon_decay_on,
    watkins_cutoff,
    explore_all,
    alpha,
    gamma,
    tau,
    lam,
    epsilon_decay_rate,
    epsilon_min,
    n_bins,
    n_bins_angle,
    x_dot_limit,
    theta_dot_limit,
    max_steps,
):
    """Run one cart-pole episode, updating ``q`` (and ``e``) in place.

    Requires all-zero eligibility traces on entry and restores that state
    before returning.  Returns (total_reward, steps, epsilon) with the
    end-of-episode epsilon decay already applied.
    """
    n_actions = q.shape[1]
    x, x_dot, theta, theta_dot = draw_start_state(rng)
    s = state_index(x, x_dot, theta, theta_dot, n_bins, n_bins_angle, x_dot_limit, theta_dot_limit)
    a = select_action_core(q[s], policy, epsilon, tau, explore_all, rng)
    total = 0.0
    steps = 0
    n_active = 0
    while True:
        steps += 1
        force = FORCE_MAG if a == 1 else -FORCE_MAG
        x, x_dot, theta, theta_dot = physics_step(x, x_dot, theta, theta_dot, force)
        terminal = out_of_bounds(x, theta)
        truncated = steps >= max_steps
        reward = FAIL_REWARD if terminal else STEP_REWARD
        total += reward
        s_next = state_index(
            x, x_dot, theta, theta_dot, n_bins, n_bins_angle, x_dot_limit, theta_dot_limit
        )
        if terminal:
            n_active = td_step(
                q, e, active, n_active, s, a, reward, s_next, 0, False,
                algorithm, use_traces, watkins_cutoff, alpha, gamma, lam,
            )
        else:
            a_next = select_action_core(q[s_next], policy, epsilon, tau, explore_all, rng)
            n_active = td_step(
                q, e, active, n_active, s, a, reward, s_next, a_next, True,
                algorithm, use_traces, watkins_cutoff, alpha, gamma, lam,
            )
        if terminal or truncated:
            break
        s = s_next
        a = a_next
    if use_traces:
        for i in range(n_active):
            f = active[i]
            e[f // n_actions, f % n_actions] = 0.0
    if epsilon_decay_on and policy == EPSILON_GREEDY:
        epsilon = epsilon * epsilon_decay_rate
        if epsilon < epsilon_min:
            epsilon = epsilon_min
    return total, steps, epsilon


@njit
def run_learning_episodes(
    q,
    e,
    active,
    rewards_out,
    epsilon,
    rng,
    algorithm,
    use_traces,
    policy,
    epsilon_decay_on,
    watkins_cutoff,
    explore_all,
    alpha,
    gamma,
    tau,
    lam,
    epsilon_decay_rate,
    epsilon_min,
    n_bins,
    n_bins_angle,
    x_dot_limit,
    theta_dot_limit,
    max_steps,
):
    """Train over ``len(rewards_out)`` episodes, filling the reward trace."""
    for ep in range(rewards_out.shape[0]):
        total, steps, epsilon = run_episode_core(
            q, e, active, epsilon, rng,
            algorithm, use_traces, policy, epsilon_decay_on, watkins_cutoff, explore_all,
            alpha, gamma, tau, lam, epsilon_decay_rate, epsilon_min,
            n_bins, n_bins_angle, x_dot_limit, theta_dot_limit, max_steps,
        )
        rewards_out[ep] = total
    return epsilon
