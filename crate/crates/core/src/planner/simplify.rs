//! Shortening solutions by merging or dropping moves of the same object.
//!
//! A solution is viewed as a list of `(object, target pose)` moves from the
//! start arrangement. For two consecutive moves of one object, A→B then
//! B→C, a candidate either drops the first (the object waits at A) or drops
//! the second and sends the first straight to C. Moves whose target equals
//! the object's current pose are dropped eagerly. A candidate is kept only
//! if every affected arrangement, grasp and motion re-validates.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, ArrangementKey, ObjectId};
use crate::geometry::Pose;
use crate::manipulation::{GripperConfig, Motion};

use super::{Planner, Solution, Step};

type Move = (ObjectId, Pose);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimplifyStats {
    pub candidates: usize,
    pub accepted: usize,
}

fn moves_of(sol: &Solution) -> Vec<Move> {
    sol.steps
        .iter()
        .map(|s| (s.object, *s.arrangement.get(s.object).expect("moved object present")))
        .collect()
}

/// Removes moves that leave their object where it already is.
fn drop_zero_moves(start: &Arrangement, moves: Vec<Move>) -> Vec<Move> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(moves.len());
    for (o, p) in moves {
        if cur.get(o) != Some(&p) {
            cur.set(o, p);
            out.push((o, p));
        }
    }
    out
}

fn candidate_seed(seed: u64, moves: &[Move]) -> u64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    for (o, p) in moves {
        o.hash(&mut h);
        p.bits().hash(&mut h);
    }
    h.finish()
}

/// Candidates for one scan of `moves`, leftmost first: standalone zero
/// moves, then for each pair of consecutive moves of one object, dropping
/// the first and then dropping the second.
fn candidates(start: &Arrangement, moves: &[Move]) -> Vec<Vec<Move>> {
    let mut out = Vec::new();
    let mut cur = start.clone();
    for (k, (o, p)) in moves.iter().enumerate() {
        if cur.get(*o) == Some(p) {
            let mut m = moves.to_vec();
            m.remove(k);
            out.push(m);
        }
        cur.set(*o, *p);
    }
    for i in 0..moves.len() {
        let o = moves[i].0;
        let Some(j) = (i + 1..moves.len()).find(|&j| moves[j].0 == o) else {
            continue;
        };
        let mut first = moves.to_vec();
        first.remove(i);
        out.push(drop_zero_moves(start, first));
        let mut second = moves.to_vec();
        second[i].1 = moves[j].1;
        second.remove(j);
        out.push(drop_zero_moves(start, second));
    }
    out
}

type StepKey = (ArrangementKey, ObjectId, ArrangementKey);

impl Planner {
    /// Merges redundant moves until a full scan changes nothing or the
    /// candidate budget (cube of the input length) is spent. The output
    /// validates whenever the input does and is never longer.
    pub fn simplify(&self, sol: &Solution, seed: u64) -> (Solution, SimplifyStats) {
        let mut stats = SimplifyStats::default();
        let n = sol.len();
        let budget = n.pow(3).max(1);
        let mut current = sol.clone();
        'scan: loop {
            let moves = moves_of(&current);
            for cand in candidates(&current.start, &moves) {
                if stats.candidates >= budget {
                    break 'scan;
                }
                stats.candidates += 1;
                if cand.len() >= moves.len() {
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(candidate_seed(seed, &cand));
                if let Some(steps) = self.rebuild(&current, &cand, &mut rng) {
                    current.steps = steps;
                    stats.accepted += 1;
                    continue 'scan;
                }
            }
            break;
        }
        (current, stats)
    }

    /// Turns a move list into steps, reusing grasps and motions of `old`
    /// wherever the surrounding arrangements and configurations are
    /// unchanged.
    fn rebuild(&self, old: &Solution, moves: &[Move], rng: &mut ChaCha8Rng) -> Option<Vec<Step>> {
        let mut known: HashMap<StepKey, &Step> = HashMap::new();
        for (before, step) in old.befores().zip(&old.steps) {
            known.insert((before.key(), step.object, step.arrangement.key()), step);
        }
        let m = &self.manipulator;
        let mut steps = Vec::with_capacity(moves.len());
        let mut cur = old.start.clone();
        let mut prev: GripperConfig = old.home;
        for &(o, pose) in moves {
            let next = cur.with(o, pose);
            let reuse = known.get(&(cur.key(), o, next.key())).copied();
            let (pick, place, transfer) = match reuse {
                Some(s) => (s.pick, s.place, s.transfer.clone()),
                None => {
                    if !self.world.collision_free(&next)
                        || !self.is_stable(&cur.without(o))
                        || !self.is_stable(&next.without(o))
                        || !self.is_stable(&next)
                    {
                        return None;
                    }
                    let (pick, place) = m.sample_grasp_confs(&self.world, &cur, &next, o, rng)?;
                    let transfer = m
                        .plan_transfer(&self.world, &cur, o, &pick, &place, &next, rng)
                        .ok()??;
                    (pick, place, Some(transfer))
                }
            };
            let transit = match reuse.and_then(|s| s.transit.as_ref()) {
                Some(t) if *t.first() == prev.released() && *t.last() == pick.released() => t.clone(),
                _ => plan_transit(self, &cur, &prev, &pick, rng)?,
            };
            steps.push(Step {
                object: o,
                pick,
                place,
                transit: Some(transit),
                transfer,
                arrangement: next.clone(),
            });
            prev = place;
            cur = next;
        }
        Some(steps)
    }
}

fn plan_transit(
    p: &Planner,
    a: &Arrangement,
    from: &GripperConfig,
    to: &GripperConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Motion> {
    p.manipulator
        .plan_transit(&p.world, a, &from.released(), &to.released(), rng)
        .ok()?
}
