//! Best responses and optimal policy pairs for the paperclip apprenticeship game.
//!
//! Theta lives on a uniform grid over [0, 1]. A human policy maps each grid
//! point to one of the three human productions (the message the robot sees);
//! a robot policy maps each message to a robot production. The robot's best
//! response plays the action that is optimal at the conditional mean of theta
//! given the message.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::paperclip::{Production, HUMAN_ACTIONS, ROBOT_ACTIONS};

/// Prior mean of theta; used for messages the human never sends.
pub const PRIOR_MEAN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedTheta {
    grid: Vec<f64>,
    prior: Vec<f64>,
}

impl DiscretizedTheta {
    /// `k` equally spaced points on [0, 1] with a uniform prior.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::input(format!("theta grid needs at least 3 points, got {k}")));
        }
        let grid = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
        Ok(DiscretizedTheta {
            grid,
            prior: vec![1.0 / k as f64; k],
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.grid
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.grid.len() - 1) as f64
    }
}

/// Human message policy: index into [`HUMAN_ACTIONS`] per grid point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanMessagePolicy {
    assignment: Vec<usize>,
}

impl HumanMessagePolicy {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.iter().any(|&a| a >= HUMAN_ACTIONS.len()) {
            return Err(Error::input("human action index out of range"));
        }
        Ok(HumanMessagePolicy { assignment })
    }

    /// Demonstration-by-expert: the production with the highest immediate
    /// reward. At the single indifference point theta = 1/2, where all three
    /// tie, the expert makes one of each.
    pub fn expert(thetas: &DiscretizedTheta) -> Self {
        let assignment = thetas
            .points()
            .iter()
            .map(|&t| {
                if t < 0.5 {
                    0
                } else if t > 0.5 {
                    2
                } else {
                    1
                }
            })
            .collect();
        HumanMessagePolicy { assignment }
    }

    /// `(0,2)` below `low`, `(1,1)` on `[low, high]`, `(2,0)` above `high`.
    pub fn thresholds(thetas: &DiscretizedTheta, low: f64, high: f64) -> Self {
        let assignment = thetas
            .points()
            .iter()
            .map(|&t| if t < low { 0 } else if t <= high { 1 } else { 2 })
            .collect();
        HumanMessagePolicy { assignment }
    }

    pub fn constant(thetas: &DiscretizedTheta, action: usize) -> Self {
        HumanMessagePolicy {
            assignment: vec![action.min(HUMAN_ACTIONS.len() - 1); thetas.len()],
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn action_at(&self, i: usize) -> Production {
        HUMAN_ACTIONS[self.assignment[i]]
    }

    /// Smallest and largest grid values at which `action` is sent.
    pub fn interval_of(&self, thetas: &DiscretizedTheta, action: usize) -> Option<(f64, f64)> {
        let first = self.assignment.iter().position(|&a| a == action)?;
        let last = self.assignment.iter().rposition(|&a| a == action)?;
        Some((thetas.points()[first], thetas.points()[last]))
    }

    /// Whether the action index is nondecreasing along the grid.
    pub fn is_monotone(&self) -> bool {
        self.assignment.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Robot policy: a response per human message plus the conditional means
/// it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotResponsePolicy {
    response: [usize; 3],
    posterior_means: [f64; 3],
}

impl RobotResponsePolicy {
    /// Arbitrary response map; posterior means are left at the prior mean.
    pub fn fixed(response: [usize; 3]) -> Result<Self> {
        if response.iter().any(|&r| r >= ROBOT_ACTIONS.len()) {
            return Err(Error::input("robot action index out of range"));
        }
        Ok(RobotResponsePolicy {
            response,
            posterior_means: [PRIOR_MEAN; 3],
        })
    }

    pub fn response_index(&self, message: usize) -> usize {
        self.response[message]
    }

    pub fn response(&self, message: usize) -> Production {
        ROBOT_ACTIONS[self.response[message]]
    }

    pub fn posterior_mean(&self, message: usize) -> f64 {
        self.posterior_means[message]
    }
}

/// Robot production with the highest reward at `theta`; ties go to the first listed.
pub fn robot_action_for_mean(theta: f64) -> usize {
    argmax_first(ROBOT_ACTIONS.iter().map(|a| a.reward(theta)))
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Best response of the robot to a human message policy.
pub fn robot_best_response(pi_h: &HumanMessagePolicy, thetas: &DiscretizedTheta) -> RobotResponsePolicy {
    let mut mass = [0.0; 3];
    let mut moment = [0.0; 3];
    for ((&a, &t), &w) in pi_h.assignment.iter().zip(thetas.points()).zip(thetas.prior()) {
        mass[a] += w;
        moment[a] += w * t;
    }
    let mut posterior_means = [PRIOR_MEAN; 3];
    let mut response = [0; 3];
    for m in 0..3 {
        if mass[m] > 0.0 {
            posterior_means[m] = moment[m] / mass[m];
        }
        response[m] = robot_action_for_mean(posterior_means[m]);
    }
    RobotResponsePolicy {
        response,
        posterior_means,
    }
}

/// Best response of the human to a robot policy: per grid point, the message
/// maximizing the undiscounted two-round payoff. Ties go to the first listed.
pub fn human_best_response(pi_r: &RobotResponsePolicy, thetas: &DiscretizedTheta) -> HumanMessagePolicy {
    let assignment = thetas
        .points()
        .iter()
        .map(|&t| argmax_first((0..3).map(|m| HUMAN_ACTIONS[m].reward(t) + pi_r.response(m).reward(t))))
        .collect();
    HumanMessagePolicy { assignment }
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub human: HumanMessagePolicy,
    pub robot: RobotResponsePolicy,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternate robot and human best responses until the human policy repeats.
pub fn iterate_best_response(
    start: &HumanMessagePolicy,
    thetas: &DiscretizedTheta,
    max_iters: usize,
) -> Result<IterationOutcome> {
    if max_iters == 0 {
        return Err(Error::input("max_iters must be at least 1"));
    }
    let mut human = start.clone();
    for iteration in 1..=max_iters {
        let robot = robot_best_response(&human, thetas);
        let next = human_best_response(&robot, thetas);
        if next == human {
            return Ok(IterationOutcome {
                human,
                robot,
                iterations: iteration,
                converged: true,
            });
        }
        human = next;
    }
    let robot = robot_best_response(&human, thetas);
    Ok(IterationOutcome {
        human,
        robot,
        iterations: max_iters,
        converged: false,
    })
}

/// Prior-weighted mean two-round payoff of a policy pair.
pub fn joint_value(pi_h: &HumanMessagePolicy, pi_r: &RobotResponsePolicy, thetas: &DiscretizedTheta) -> f64 {
    pi_h.assignment
        .iter()
        .zip(thetas.points())
        .zip(thetas.prior())
        .map(|((&m, &t), &w)| w * (HUMAN_ACTIONS[m].reward(t) + pi_r.response(m).reward(t)))
        .sum::<f64>()
        / thetas.prior().iter().sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct JointSearchOutcome {
    pub human: HumanMessagePolicy,
    pub robot: RobotResponsePolicy,
    pub value: f64,
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Best pair among human policies of interval form: cut indices `i <= j`
/// split the grid into `[0, i)`, `[i, j)`, `[j, K)` and each interval sends a
/// distinct message. The robot best-responds to each candidate.
pub fn exhaustive_joint_search(thetas: &DiscretizedTheta) -> JointSearchOutcome {
    let k = thetas.len();
    // Prefix sums of prior mass and first moment.
    let mut mass = vec![0.0; k + 1];
    let mut moment = vec![0.0; k + 1];
    for (i, (&t, &w)) in thetas.points().iter().zip(thetas.prior()).enumerate() {
        mass[i + 1] = mass[i] + w;
        moment[i + 1] = moment[i] + w * t;
    }
    // Integrated payoff of production `a` over an interval: q W + (p - q) T.
    let payoff = |a: Production, w: f64, t: f64| {
        f64::from(a.staples) * w + (f64::from(a.paperclips) - f64::from(a.staples)) * t
    };
    let robot_best = |w: f64, t: f64| {
        ROBOT_ACTIONS
            .iter()
            .map(|&r| payoff(r, w, t))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let best = (0..=k)
        .into_par_iter()
        .map(|i| {
            let mut local: Option<(f64, usize, usize, usize)> = None;
            for j in i..=k {
                let spans = [(0, i), (i, j), (j, k)];
                let mut robot_part = 0.0;
                let mut wt = [(0.0, 0.0); 3];
                for (slot, &(lo, hi)) in spans.iter().enumerate() {
                    let w = mass[hi] - mass[lo];
                    let t = moment[hi] - moment[lo];
                    wt[slot] = (w, t);
                    if hi > lo {
                        robot_part += robot_best(w, t);
                    }
                }
                for (p, perm) in PERMUTATIONS.iter().enumerate() {
                    let human_part: f64 = (0..3)
                        .map(|slot| payoff(HUMAN_ACTIONS[perm[slot]], wt[slot].0, wt[slot].1))
                        .sum();
                    let v = robot_part + human_part;
                    if local.map_or(true, |(b, ..)| v > b) {
                        local = Some((v, j, p, i));
                    }
                }
            }
            local.expect("j ranges over at least one value")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(f64, usize, usize, usize)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .expect("grid is non-empty");

    let (_, j, p, i) = best;
    let perm = PERMUTATIONS[p];
    let assignment = (0..k)
        .map(|idx| if idx < i { perm[0] } else if idx < j { perm[1] } else { perm[2] })
        .collect();
    let human = HumanMessagePolicy { assignment };
    let robot = robot_best_response(&human, thetas);
    let value = joint_value(&human, &robot, thetas);
    JointSearchOutcome { human, robot, value }
}

/// Optimum over all human policies, not only interval-form ones.
///
/// For a fixed robot map the human's best reply is pointwise, so enumerating
/// the 27 robot maps covers every policy pair.
pub fn unrestricted_optimum(thetas: &DiscretizedTheta) -> JointSearchOutcome {
    let mut best: Option<JointSearchOutcome> = None;
    for code in 0..27 {
        let map = [code % 3, (code / 3) % 3, code / 9];
        let robot = RobotResponsePolicy::fixed(map).expect("indices in range");
        let human = human_best_response(&robot, thetas);
        let value = joint_value(&human, &robot, thetas);
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(JointSearchOutcome { human, robot, value });
        }
    }
    best.expect("27 candidates")
}

/// Summary of the paperclip analysis, as reported by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct PaperclipReport {
    pub grid_points: usize,
    pub grid_step: f64,
    pub analytic_lower: f64,
    pub analytic_upper: f64,
    pub fixpoint_lower: f64,
    pub fixpoint_upper: f64,
    pub fixpoint_iterations: usize,
    pub fixpoint_converged: bool,
    pub exhaustive_lower: f64,
    pub exhaustive_upper: f64,
    pub expert_pair_value: f64,
    pub fixpoint_pair_value: f64,
    pub optimal_value: f64,
    pub expert_is_best_response: bool,
    pub fixpoint_robot_means: [f64; 3],
    pub fixpoint_robot_response: [String; 3],
    pub elapsed_ms: u128,
}

/// Run the full analysis on a `k`-point grid.
pub fn paperclip_report(k: usize) -> Result<PaperclipReport> {
    let started = std::time::Instant::now();
    let thetas = DiscretizedTheta::uniform(k)?;
    let expert = HumanMessagePolicy::expert(&thetas);
    let expert_robot = robot_best_response(&expert, &thetas);
    let reply = human_best_response(&expert_robot, &thetas);
    let fix = iterate_best_response(&expert, &thetas, 100)?;
    let opt = exhaustive_joint_search(&thetas);
    let missing = || Error::input("the (1,1) message is never sent on this grid");
    let (fl, fu) = fix.human.interval_of(&thetas, 1).ok_or_else(missing)?;
    let (el, eu) = opt.human.interval_of(&thetas, 1).ok_or_else(missing)?;
    Ok(PaperclipReport {
        grid_points: k,
        grid_step: thetas.step(),
        analytic_lower: 41.0 / 92.0,
        analytic_upper: 51.0 / 92.0,
        fixpoint_lower: fl,
        fixpoint_upper: fu,
        fixpoint_iterations: fix.iterations,
        fixpoint_converged: fix.converged,
        exhaustive_lower: el,
        exhaustive_upper: eu,
        expert_pair_value: joint_value(&expert, &expert_robot, &thetas),
        fixpoint_pair_value: joint_value(&fix.human, &fix.robot, &thetas),
        optimal_value: opt.value,
        expert_is_best_response: reply == expert,
        fixpoint_robot_means: fix.robot.posterior_means,
        fixpoint_robot_response: [0, 1, 2].map(|m| fix.robot.response(m).to_string()),
        elapsed_ms: started.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_needs_three_points() {
        assert!(DiscretizedTheta::uniform(2).is_err());
        let g = DiscretizedTheta::uniform(5).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn robot_reply_to_thirds_policy() {
        let g = DiscretizedTheta::uniform(30_001).unwrap();
        let pi_h = HumanMessagePolicy::thresholds(&g, 1.0 / 3.0, 2.0 / 3.0);
        let r = robot_best_response(&pi_h, &g);
        assert!((r.posterior_mean(0) - 1.0 / 6.0).abs() < 1e-4);
        assert_eq!(r.response(0), Production::new(0, 90));
    }

    #[test]
    fn robot_reply_to_expert() {
        let g = DiscretizedTheta::uniform(10_000).unwrap();
        let r = robot_best_response(&HumanMessagePolicy::expert(&g), &g);
        assert!((r.posterior_mean(0) - 0.25).abs() < 1e-3);
        assert_eq!(r.response(0), Production::new(0, 90));
        assert_eq!(r.response(2), Production::new(90, 0));
        // Even grid: theta = 1/2 is absent so (1,1) is never sent.
        assert_eq!(r.posterior_mean(1), PRIOR_MEAN);
        assert_eq!(r.response(1), Production::new(50, 50));
    }

    #[test]
    fn constant_message_gets_balanced_reply() {
        let g = DiscretizedTheta::uniform(101).unwrap();
        let r = robot_best_response(&HumanMessagePolicy::constant(&g, 1), &g);
        assert!((r.posterior_mean(1) - 0.5).abs() < 1e-12);
        assert_eq!(r.response(1), Production::new(50, 50));
    }

    #[test]
    fn human_sacrifices_at_049() {
        let robot = RobotResponsePolicy::fixed([0, 1, 2]).unwrap();
        let g = DiscretizedTheta::uniform(101).unwrap();
        let h = human_best_response(&robot, &g);
        assert_eq!(h.assignment()[49], 1);
        assert_eq!(h.assignment()[0], 0);
        assert_eq!(h.assignment()[100], 2);
    }

    #[test]
    fn balanced_robot_makes_human_an_expert() {
        // Even grid, so the three-way tie at theta = 1/2 is not a grid point.
        let robot = RobotResponsePolicy::fixed([1, 1, 1]).unwrap();
        let g = DiscretizedTheta::uniform(100).unwrap();
        let h = human_best_response(&robot, &g);
        assert_eq!(h, HumanMessagePolicy::expert(&g));
    }

    #[test]
    fn constant_pair_value() {
        let g = DiscretizedTheta::uniform(11).unwrap();
        let h = HumanMessagePolicy::constant(&g, 1);
        let r = RobotResponsePolicy::fixed([1, 1, 1]).unwrap();
        assert!((joint_value(&h, &r, &g) - 51.0).abs() < 1e-12);
    }

    #[test]
    fn fixpoint_restarts_in_one_iteration() {
        let g = DiscretizedTheta::uniform(1001).unwrap();
        let first = iterate_best_response(&HumanMessagePolicy::expert(&g), &g, 50).unwrap();
        assert!(first.converged);
        let again = iterate_best_response(&first.human, &g, 50).unwrap();
        assert!(again.converged);
        assert_eq!(again.iterations, 1);
        assert!(first.human.is_monotone());
    }

    #[test]
    fn zero_iterations_rejected() {
        let g = DiscretizedTheta::uniform(11).unwrap();
        assert!(iterate_best_response(&HumanMessagePolicy::expert(&g), &g, 0).is_err());
    }

    #[test]
    fn threshold_search_matches_unrestricted_optimum() {
        for k in [3, 4, 7, 12, 19, 31] {
            let g = DiscretizedTheta::uniform(k).unwrap();
            let restricted = exhaustive_joint_search(&g);
            let full = unrestricted_optimum(&g);
            assert!((restricted.value - full.value).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn brute_force_over_all_human_policies() {
        for k in [3, 5, 8] {
            let g = DiscretizedTheta::uniform(k).unwrap();
            let mut best = f64::NEG_INFINITY;
            for code in 0..3usize.pow(k as u32) {
                let assignment = (0..k).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
                let h = HumanMessagePolicy::new(assignment).unwrap();
                let r = robot_best_response(&h, &g);
                best = best.max(joint_value(&h, &r, &g));
            }
            let full = unrestricted_optimum(&g);
            let restricted = exhaustive_joint_search(&g);
            assert!(full.value >= best - 1e-9, "k={k}");
            assert!((restricted.value - best).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn value_is_permutation_invariant() {
        let g = DiscretizedTheta::uniform(21).unwrap();
        let h = HumanMessagePolicy::thresholds(&g, 0.3, 0.6);
        let r = robot_best_response(&h, &g);
        let v = joint_value(&h, &r, &g);
        let mut order: Vec<usize> = (0..21).collect();
        order.reverse();
        order.swap(3, 17);
        let shuffled = DiscretizedTheta {
            grid: order.iter().map(|&i| g.points()[i]).collect(),
            prior: order.iter().map(|&i| g.prior()[i]).collect(),
        };
        let h2 = HumanMessagePolicy::new(order.iter().map(|&i| h.assignment()[i]).collect()).unwrap();
        assert!((joint_value(&h2, &r, &shuffled) - v).abs() < 1e-12);
    }
}
