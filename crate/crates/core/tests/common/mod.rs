//! Shared harness for the integration suites: a seeded generator of finite
//! intervention games whose utilities respect the intervention ordering by
//! construction, plus independent brute-force oracles that enumerate every
//! tabulated mechanism instead of trusting the library's characterizations.

// each test target compiles its own copy and uses a different subset
#![allow(dead_code)]
// the oracle fills fixed-shape arrays; index loops mirror the math directly
#![allow(clippy::needless_range_loop)]

use intervention::models::{finite_tabulated_game, FiniteTabulatedSpec};
use intervention::InterventionGame;
use rand::Rng;

/// Action values shared by both users and the manager in generated games.
pub const ACTIONS: [f64; 3] = [0.0, 0.5, 1.0];
/// Number of user profiles (two users, three actions each).
pub const PROFILES: usize = 9;
/// Number of tabulated mechanisms (one manager action per profile).
pub const MECHANISMS: usize = 19683; // 3^9

/// Draws a two-user, three-action finite game with utilities in [0, 1],
/// sorted so every user weakly prefers less intervention at every profile;
/// the manager is benevolent (equal weights), which inherits the ordering.
pub fn conformant_finite_spec(rng: &mut impl Rng) -> FiniteTabulatedSpec {
    let mut user_tables = vec![vec![0.0; 3 * PROFILES]; 2];
    for table in &mut user_tables {
        for q in 0..PROFILES {
            let mut draws = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            draws.sort_by(|a, b| b.partial_cmp(a).expect("finite draws"));
            for (k, v) in draws.iter().enumerate() {
                table[k * PROFILES + q] = *v;
            }
        }
    }
    FiniteTabulatedSpec {
        user_actions: vec![ACTIONS.to_vec(), ACTIONS.to_vec()],
        manager_actions: ACTIONS.to_vec(),
        user_tables,
        manager_table: None,
        weights: None,
    }
}

pub fn build_game(spec: &FiniteTabulatedSpec) -> InterventionGame {
    finite_tabulated_game(spec).expect("generated spec is well-formed")
}

/// Brute-force view of a generated game: `u[i][k][q]` is user i's utility at
/// manager action k and profile q (q = 3 * user-1 index + user-2 index).
pub struct BruteForce {
    u: [[[f64; PROFILES]; 3]; 2],
}

impl BruteForce {
    pub fn new(spec: &FiniteTabulatedSpec) -> Self {
        let mut u = [[[0.0; PROFILES]; 3]; 2];
        for i in 0..2 {
            for k in 0..3 {
                for q in 0..PROFILES {
                    u[i][k][q] = spec.user_tables[i][k * PROFILES + q];
                }
            }
        }
        BruteForce { u }
    }

    /// Whether profile q is a Nash equilibrium of the game induced by the
    /// tabulated mechanism whose per-profile manager actions are `plan`.
    fn is_nash(&self, plan: &[usize; PROFILES], q: usize) -> bool {
        let (i1, i2) = (q / 3, q % 3);
        for j in 0..3 {
            // user 1 moves the most significant digit, user 2 the least;
            // the mechanism reacts to the deviation profile
            let dev1 = j * 3 + i2;
            if self.u[0][plan[dev1]][dev1] > self.u[0][plan[q]][q] {
                return false;
            }
            let dev2 = i1 * 3 + j;
            if self.u[1][plan[dev2]][dev2] > self.u[1][plan[q]][q] {
                return false;
            }
        }
        true
    }

    /// Enumerates all 3^9 tabulated mechanisms and returns, exactly:
    /// which profiles are a Nash equilibrium under at least one mechanism,
    /// and the largest manager value over all (mechanism, Nash profile)
    /// pairs (`None` when no pair exists).
    pub fn union_and_best(&self) -> ([bool; PROFILES], Option<f64>) {
        let mut union = [false; PROFILES];
        let mut best: Option<f64> = None;
        for m in 0..MECHANISMS {
            let mut plan = [0usize; PROFILES];
            let mut x = m;
            for d in &mut plan {
                *d = x % 3;
                x /= 3;
            }
            for q in 0..PROFILES {
                if self.is_nash(&plan, q) {
                    union[q] = true;
                    let value = self.u[0][plan[q]][q] + self.u[1][plan[q]][q];
                    if best.is_none_or(|b| value > b) {
                        best = Some(value);
                    }
                }
            }
        }
        (union, best)
    }
}

/// Maps a profile of `ACTIONS` values back to its flat index.
pub fn profile_index(a: &[f64]) -> usize {
    let pos = |x: f64| {
        ACTIONS
            .iter()
            .position(|v| (v - x).abs() <= 1e-12)
            .expect("profile coordinate is a generator action")
    };
    pos(a[0]) * 3 + pos(a[1])
}
