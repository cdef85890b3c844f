//! Benchmark POMDP constructors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::pomdp::{Pomdp, PomdpParts};
use crate::error::{Error, Result};
use crate::transport::GroundMetric;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Dense kernel builder with `[a][s][s']` and `[a][s'][o]` layouts.
struct Kernels {
    ns: usize,
    na: usize,
    no: usize,
    transition: Vec<f64>,
    observation: Vec<f64>,
    reward: Vec<f64>,
}

impl Kernels {
    fn new(ns: usize, na: usize, no: usize) -> Self {
        Self {
            ns,
            na,
            no,
            transition: vec![0.0; na * ns * ns],
            observation: vec![0.0; na * ns * no],
            reward: vec![0.0; ns * na],
        }
    }

    fn p(&mut self, a: usize, s: usize, s2: usize) -> &mut f64 {
        &mut self.transition[(a * self.ns + s) * self.ns + s2]
    }

    fn z(&mut self, a: usize, s2: usize, o: usize) -> &mut f64 {
        &mut self.observation[(a * self.ns + s2) * self.no + o]
    }

    fn r(&mut self, s: usize, a: usize) -> &mut f64 {
        &mut self.reward[s * self.na + a]
    }

    fn finish(
        self,
        name: String,
        states: Vec<String>,
        actions: Vec<String>,
        observations: Vec<String>,
        initial: Vec<f64>,
        metric: GroundMetric,
    ) -> Result<Pomdp> {
        Pomdp::new(PomdpParts {
            name,
            states,
            actions,
            observations,
            transition: self.transition,
            observation: self.observation,
            reward: self.reward,
            initial,
            metric,
        })
    }
}

fn check_accuracy(what: &str, accuracy: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::InvalidBenchmark { spec: what.into(), reason: format!("accuracy {accuracy} outside [0, 1]") });
    }
    Ok(())
}

/// Tiger with the single action `listen`.
pub fn tiger_listen_only(accuracy: f64) -> Result<Pomdp> {
    check_accuracy("tiger-listen", accuracy)?;
    let mut k = Kernels::new(2, 1, 2);
    for s in 0..2 {
        *k.p(0, s, s) = 1.0;
        *k.z(0, s, s) = accuracy;
        *k.z(0, s, 1 - s) = 1.0 - accuracy;
        *k.r(s, 0) = -1.0;
    }
    k.finish(
        "tiger-listen".into(),
        strings(&["tiger-left", "tiger-right"]),
        strings(&["listen"]),
        strings(&["L", "R"]),
        vec![0.5, 0.5],
        GroundMetric::discrete(2),
    )
}

/// Tiger with `listen`, `open-left`, `open-right`.
///
/// Opening a door resets the tiger uniformly and emits a uniformly random observation.
/// Rewards: listen −1, opening the tiger-free door +10, opening the tiger's door −100.
pub fn tiger_full(accuracy: f64) -> Result<Pomdp> {
    check_accuracy("tiger-full", accuracy)?;
    let mut k = Kernels::new(2, 3, 2);
    for s in 0..2 {
        *k.p(0, s, s) = 1.0;
        *k.z(0, s, s) = accuracy;
        *k.z(0, s, 1 - s) = 1.0 - accuracy;
        *k.r(s, 0) = -1.0;
        for a in 1..3 {
            for s2 in 0..2 {
                *k.p(a, s, s2) = 0.5;
                *k.z(a, s2, 0) = 0.5;
                *k.z(a, s2, 1) = 0.5;
            }
        }
    }
    // open-left (a=1) meets the tiger when it is left (s=0).
    *k.r(0, 1) = -100.0;
    *k.r(1, 1) = 10.0;
    *k.r(0, 2) = 10.0;
    *k.r(1, 2) = -100.0;
    k.finish(
        "tiger-full".into(),
        strings(&["tiger-left", "tiger-right"]),
        strings(&["listen", "open-left", "open-right"]),
        strings(&["L", "R"]),
        vec![0.5, 0.5],
        GroundMetric::discrete(2),
    )
}

/// Move success probability in GridWorld.
pub const GRID_MOVE_SUCCESS: f64 = 0.9;
/// Quadrant observation accuracy in GridWorld.
pub const GRID_OBS_ACCURACY: f64 = 0.85;

/// Quadrant index (NW=0, NE=1, SW=2, SE=3) of a cell in an `n×n` grid.
pub fn grid_quadrant(n: usize, r: usize, c: usize) -> usize {
    let half = n as f64 / 2.0;
    let south = (r as f64) >= half;
    let east = (c as f64) >= half;
    2 * usize::from(south) + usize::from(east)
}

/// `n×n` GridWorld with actions Up, Down, Left, Right, Stay and noisy quadrant observations.
///
/// Moves succeed with probability 0.9 and otherwise stay; blocked moves stay. The
/// observation reports the true quadrant with probability 0.85 and each other quadrant
/// with probability 0.05. Reward 1 in the south-east corner cell; uniform initial belief.
pub fn gridworld(n: usize) -> Result<Pomdp> {
    if !(2..=32).contains(&n) {
        return Err(Error::InvalidBenchmark { spec: format!("gridworld:{n}"), reason: "grid size must lie in [2, 32]".into() });
    }
    let ns = n * n;
    let mut k = Kernels::new(ns, 5, 4);
    let moves: [(isize, isize); 5] = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];
    for (a, &(dr, dc)) in moves.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let s = r * n + c;
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                let inside = nr >= 0 && nc >= 0 && (nr as usize) < n && (nc as usize) < n;
                if a == 4 || !inside {
                    *k.p(a, s, s) = 1.0;
                } else {
                    let t = nr as usize * n + nc as usize;
                    *k.p(a, s, t) += GRID_MOVE_SUCCESS;
                    *k.p(a, s, s) += 1.0 - GRID_MOVE_SUCCESS;
                }
                let q = grid_quadrant(n, r, c);
                for o in 0..4 {
                    *k.z(a, s, o) = if o == q { GRID_OBS_ACCURACY } else { (1.0 - GRID_OBS_ACCURACY) / 3.0 };
                }
                *k.r(s, a) = if s == ns - 1 { 1.0 } else { 0.0 };
            }
        }
    }
    let states = (0..ns).map(|s| format!("({},{})", s / n, s % n)).collect();
    k.finish(
        format!("gridworld:{n}"),
        states,
        strings(&["up", "down", "left", "right", "stay"]),
        strings(&["NW", "NE", "SW", "SE"]),
        vec![1.0 / ns as f64; ns],
        GroundMetric::grid_quadrant(),
    )
}

/// Rock positions `(row, col)` used by [`rocksample`].
pub fn rock_positions(n: usize, k: usize) -> Vec<(usize, usize)> {
    const STANDARD_4_4: [(usize, usize); 4] = [(3, 1), (2, 1), (1, 3), (0, 2)];
    if n == 4 && k <= 4 {
        return STANDARD_4_4[..k].to_vec();
    }
    // Deterministic distinct cells from a fixed generator.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + (n * 64 + k) as u64);
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(k);
    while cells.len() < k {
        let cell = (rng.random_range(0..n), rng.random_range(0..n));
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    cells
}

/// Sensor half-efficiency distance (cells) for RockSample checks.
pub const ROCK_SENSOR_HALF_DISTANCE: f64 = 2.0;

/// RockSample(n, k): `n²·2^k + 1` states including an absorbing exit state.
///
/// Actions: North, South, East, West, Sample, Check_1..Check_k. Observations:
/// none, good, bad. Checking rock `i` from distance `d` reports its quality with
/// accuracy `0.5 + 0.5·2^(−d/2)`. Sampling a good rock gives +10 and turns it bad,
/// sampling a bad rock or an empty cell gives −10. Moving east off the grid enters
/// the exit state with +10. The agent starts at `(n/2, 0)` with uniform rock qualities.
pub fn rocksample(n: usize, k: usize) -> Result<Pomdp> {
    if !(2..=8).contains(&n) || k == 0 || k > 8 || k > n * n {
        return Err(Error::InvalidBenchmark {
            spec: format!("rocksample:{n},{k}"),
            reason: "requires 2 ≤ n ≤ 8 and 1 ≤ k ≤ min(8, n²)".into(),
        });
    }
    let rocks = rock_positions(n, k);
    let nr = 1usize << k;
    let ns = n * n * nr + 1;
    let exit = ns - 1;
    let na = 5 + k;
    let (none, good, bad) = (0, 1, 2);
    let mut km = Kernels::new(ns, na, 3);
    let index = |r: usize, c: usize, bits: usize| (r * n + c) * nr + bits;
    for a in 0..na {
        *km.p(a, exit, exit) = 1.0;
        *km.z(a, exit, none) = 1.0;
    }
    for r in 0..n {
        for c in 0..n {
            for bits in 0..nr {
                let s = index(r, c, bits);
                // Moves.
                let targets = [
                    (r.saturating_sub(1), c, false),
                    ((r + 1).min(n - 1), c, false),
                    (r, c + 1, c + 1 == n),
                    (r, c.saturating_sub(1), false),
                ];
                for (a, &(tr, tc, leaves)) in targets.iter().enumerate() {
                    if leaves {
                        *km.p(a, s, exit) = 1.0;
                        *km.r(s, a) = 10.0;
                    } else {
                        *km.p(a, s, index(tr, tc, bits)) = 1.0;
                    }
                }
                // Sample.
                match rocks.iter().position(|&p| p == (r, c)) {
                    Some(i) if bits & (1 << i) != 0 => {
                        *km.p(4, s, index(r, c, bits & !(1 << i))) = 1.0;
                        *km.r(s, 4) = 10.0;
                    }
                    _ => {
                        *km.p(4, s, s) = 1.0;
                        *km.r(s, 4) = -10.0;
                    }
                }
                // Checks.
                for (i, &(rr, rc)) in rocks.iter().enumerate() {
                    let a = 5 + i;
                    *km.p(a, s, s) = 1.0;
                    let d = ((r as f64 - rr as f64).powi(2) + (c as f64 - rc as f64).powi(2)).sqrt();
                    let acc = 0.5 + 0.5 * 2f64.powf(-d / ROCK_SENSOR_HALF_DISTANCE);
                    let is_good = bits & (1 << i) != 0;
                    *km.z(a, s, good) = if is_good { acc } else { 1.0 - acc };
                    *km.z(a, s, bad) = if is_good { 1.0 - acc } else { acc };
                }
                for a in 0..5 {
                    *km.z(a, s, none) = 1.0;
                }
            }
        }
    }
    let mut initial = vec![0.0; ns];
    for bits in 0..nr {
        initial[index(n / 2, 0, bits)] = 1.0 / nr as f64;
    }
    let mut states: Vec<String> = Vec::with_capacity(ns);
    for r in 0..n {
        for c in 0..n {
            for bits in 0..nr {
                states.push(format!("({r},{c})/{bits:0k$b}"));
            }
        }
    }
    states.push("exit".into());
    let mut actions = strings(&["north", "south", "east", "west", "sample"]);
    actions.extend((0..k).map(|i| format!("check{}", i + 1)));
    km.finish(format!("rocksample:{n},{k}"), states, actions, strings(&["none", "good", "bad"]), initial, GroundMetric::discrete(3))
}

/// Per-step failure probability of a working node in network monitoring.
pub const NET_FAILURE_RATE: f64 = 0.1;
/// Probe accuracy in network monitoring.
pub const NET_PROBE_ACCURACY: f64 = 0.95;

/// Network monitoring with `n` binary nodes: `2^n` states, `n` probes plus reboot.
///
/// Working nodes fail independently with probability 0.1 per step; failed nodes stay
/// failed until a reboot restores all nodes. Probe `i` reports node `i` as ok/fault
/// with accuracy 0.95; reboot emits null. Reward `−#failed`, with an extra −1 for reboot.
/// The network starts fully operational.
pub fn network_monitoring(n: usize) -> Result<Pomdp> {
    if !(1..=10).contains(&n) {
        return Err(Error::InvalidBenchmark { spec: format!("network:{n}"), reason: "node count must lie in [1, 10]".into() });
    }
    let ns = 1usize << n;
    let na = n + 1;
    let reboot = n;
    let (null, ok, fault) = (0, 1, 2);
    let mut k = Kernels::new(ns, na, 3);
    for s in 0..ns {
        let failed = s.count_ones() as usize;
        let working: Vec<usize> = (0..n).filter(|i| s & (1 << i) == 0).collect();
        for a in 0..n {
            // Enumerate subsets of working nodes that fail this step.
            for mask in 0..(1usize << working.len()) {
                let mut s2 = s;
                let mut prob = 1.0;
                for (j, &node) in working.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        s2 |= 1 << node;
                        prob *= NET_FAILURE_RATE;
                    } else {
                        prob *= 1.0 - NET_FAILURE_RATE;
                    }
                }
                *k.p(a, s, s2) += prob;
            }
            *k.r(s, a) = -(failed as f64);
        }
        *k.p(reboot, s, 0) = 1.0;
        *k.r(s, reboot) = -(failed as f64) - 1.0;
    }
    for s2 in 0..ns {
        for a in 0..n {
            let is_fault = s2 & (1 << a) != 0;
            *k.z(a, s2, ok) = if is_fault { 1.0 - NET_PROBE_ACCURACY } else { NET_PROBE_ACCURACY };
            *k.z(a, s2, fault) = if is_fault { NET_PROBE_ACCURACY } else { 1.0 - NET_PROBE_ACCURACY };
        }
        *k.z(reboot, s2, null) = 1.0;
    }
    let mut initial = vec![0.0; ns];
    initial[0] = 1.0;
    let states = (0..ns).map(|s| format!("{s:0n$b}")).collect();
    let mut actions: Vec<String> = (0..n).map(|i| format!("probe{i}")).collect();
    actions.push("reboot".into());
    k.finish(format!("network:{n}"), states, actions, strings(&["null", "ok", "fault"]), initial, GroundMetric::discrete(3))
}

/// Hallway landmark accuracy.
pub const HALLWAY_ACCURACY: f64 = 0.9;

/// Corridor of `len` cells with actions left, right, stay and landmarks `position mod 3`.
///
/// Moves are deterministic and clamped at the ends. The landmark is reported correctly
/// with probability 0.9 and as each other landmark with probability 0.05. Reward 1 at
/// the right end; uniform initial belief.
pub fn hallway(len: usize) -> Result<Pomdp> {
    if !(2..=1000).contains(&len) {
        return Err(Error::InvalidBenchmark { spec: format!("hallway:{len}"), reason: "length must lie in [2, 1000]".into() });
    }
    let mut k = Kernels::new(len, 3, 3);
    for s in 0..len {
        *k.p(0, s, s.saturating_sub(1)) = 1.0;
        *k.p(1, s, (s + 1).min(len - 1)) = 1.0;
        *k.p(2, s, s) = 1.0;
        for a in 0..3 {
            for o in 0..3 {
                *k.z(a, s, o) = if o == s % 3 { HALLWAY_ACCURACY } else { (1.0 - HALLWAY_ACCURACY) / 2.0 };
            }
            *k.r(s, a) = if s == len - 1 { 1.0 } else { 0.0 };
        }
    }
    k.finish(
        format!("hallway:{len}"),
        labels("cell", len),
        strings(&["left", "right", "stay"]),
        strings(&["mark0", "mark1", "mark2"]),
        vec![1.0 / len as f64; len],
        GroundMetric::discrete(3),
    )
}

/// Default action count of [`random_pomdp`].
pub const RANDOM_ACTIONS: usize = 3;
/// Successors kept per `(s, a)` in the structured random variant.
pub const STRUCTURED_SUCCESSORS: usize = 3;

fn dirichlet_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
    row
}

/// Random POMDP with Dirichlet(1) rows for `P` and `Z`, three actions, uniform rewards
/// in `[0, 1)`, and uniform initial belief. The structured variant keeps three random
/// successors per `(s, a)` before normalization.
pub fn random_pomdp(n_states: usize, n_obs: usize, seed: u64, structured: bool) -> Result<Pomdp> {
    if n_states == 0 || n_obs == 0 || n_states > 5000 || n_obs > 64 {
        return Err(Error::InvalidBenchmark {
            spec: format!("random:{n_states},{n_obs},seed={seed}"),
            reason: "requires 1 ≤ |S| ≤ 5000 and 1 ≤ |O| ≤ 64".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let na = RANDOM_ACTIONS;
    let mut k = Kernels::new(n_states, na, n_obs);
    for a in 0..na {
        for s in 0..n_states {
            if structured && n_states > STRUCTURED_SUCCESSORS {
                let mut chosen: Vec<usize> = Vec::with_capacity(STRUCTURED_SUCCESSORS);
                while chosen.len() < STRUCTURED_SUCCESSORS {
                    let t = rng.random_range(0..n_states);
                    if !chosen.contains(&t) {
                        chosen.push(t);
                    }
                }
                let w = dirichlet_row(&mut rng, STRUCTURED_SUCCESSORS);
                for (&t, &p) in chosen.iter().zip(&w) {
                    *k.p(a, s, t) = p;
                }
            } else {
                let row = dirichlet_row(&mut rng, n_states);
                for (t, p) in row.into_iter().enumerate() {
                    *k.p(a, s, t) = p;
                }
            }
        }
    }
    for a in 0..na {
        for s in 0..n_states {
            let row = dirichlet_row(&mut rng, n_obs);
            for (o, p) in row.into_iter().enumerate() {
                *k.z(a, s, o) = p;
            }
        }
    }
    for s in 0..n_states {
        for a in 0..na {
            *k.r(s, a) = rng.random::<f64>();
        }
    }
    let name = if structured {
        format!("random:{n_states},{n_obs},seed={seed},structured")
    } else {
        format!("random:{n_states},{n_obs},seed={seed}")
    };
    k.finish(
        name,
        labels("s", n_states),
        labels("a", na),
        labels("o", n_obs),
        vec![1.0 / n_states as f64; n_states],
        GroundMetric::discrete(n_obs),
    )
}

/// Nine-state model separating stochastic from deterministic stationary probes.
///
/// From `p_L`/`p_R` either action leads to `x_0`/`y_0` emitting `L`/`R`. From
/// `x_0`,`y_0`, action A moves to `x_1`,`y_1` and B to `d_U`, both emitting `U`.
/// From `x_1`,`y_1`, A moves to `d_U` (emits `U`) and B to `d_X`/`d_Y` (emits `X`/`Y`).
/// The `d_*` states are absorbing. Observations depend only on the successor state.
pub fn stationary_witness() -> Result<Pomdp> {
    const PL: usize = 0;
    const PR: usize = 1;
    const X0: usize = 2;
    const Y0: usize = 3;
    const X1: usize = 4;
    const Y1: usize = 5;
    const DU: usize = 6;
    const DX: usize = 7;
    const DY: usize = 8;
    const A: usize = 0;
    const B: usize = 1;
    let (l, r, u, x, y) = (0, 1, 2, 3, 4);
    let mut k = Kernels::new(9, 2, 5);
    for a in [A, B] {
        *k.p(a, PL, X0) = 1.0;
        *k.p(a, PR, Y0) = 1.0;
        for d in [DU, DX, DY] {
            *k.p(a, d, d) = 1.0;
        }
    }
    *k.p(A, X0, X1) = 1.0;
    *k.p(A, Y0, Y1) = 1.0;
    *k.p(B, X0, DU) = 1.0;
    *k.p(B, Y0, DU) = 1.0;
    *k.p(A, X1, DU) = 1.0;
    *k.p(A, Y1, DU) = 1.0;
    *k.p(B, X1, DX) = 1.0;
    *k.p(B, Y1, DY) = 1.0;
    let emit = [u, u, l, r, u, u, u, x, y];
    for a in [A, B] {
        for (s2, &o) in emit.iter().enumerate() {
            *k.z(a, s2, o) = 1.0;
        }
    }
    let mut initial = vec![0.0; 9];
    initial[PL] = 0.5;
    initial[PR] = 0.5;
    k.finish(
        "witness".into(),
        strings(&["p_L", "p_R", "x_0", "y_0", "x_1", "y_1", "d_U", "d_X", "d_Y"]),
        strings(&["A", "B"]),
        strings(&["L", "R", "U", "X", "Y"]),
        initial,
        GroundMetric::discrete(5),
    )
}

/// One state, one action, emitting a fixed observation distribution every step.
pub fn single_state(observation: Vec<f64>) -> Result<Pomdp> {
    let no = observation.len();
    let mut k = Kernels::new(1, 1, no);
    *k.p(0, 0, 0) = 1.0;
    for (o, &p) in observation.iter().enumerate() {
        *k.z(0, 0, o) = p;
    }
    k.finish("single-state".into(), strings(&["s"]), strings(&["a"]), labels("o", no), vec![1.0], GroundMetric::discrete(no))
}
