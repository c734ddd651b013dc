use crate::error::{Error, Result};
use crate::game::World;

use super::PolicyTable;

/// State visitation per timestep and the feature expectation it implies.
#[derive(Debug, Clone)]
pub struct Occupancy {
    /// `(steps + 1)` distributions over states; layer 0 is the start.
    pub visitation: Vec<Vec<f64>>,
    pub expected_features: Vec<f64>,
}

impl Occupancy {
    /// Expected features accumulated over layers `0..=t`.
    pub fn prefix_features<W: World + ?Sized>(&self, world: &W, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; world.num_features()];
        for layer in &self.visitation[..=t] {
            accumulate(world, layer, &mut out);
        }
        out
    }
}

fn accumulate<W: World + ?Sized>(world: &W, dist: &[f64], out: &mut [f64]) {
    for (s, &p) in dist.iter().enumerate() {
        if p != 0.0 {
            for (acc, f) in out.iter_mut().zip(world.features(s)) {
                *acc += p * f;
            }
        }
    }
}

/// Push the start distribution forward through `policy` for `steps` steps.
pub fn occupancy_and_features<W: World + ?Sized>(
    world: &W,
    policy: &PolicyTable,
    start: usize,
    steps: usize,
) -> Result<Occupancy> {
    let ns = world.num_states();
    if start >= ns {
        return Err(Error::input(format!("start state {start} out of range")));
    }
    if policy.num_states() != ns || policy.num_actions() != world.num_actions() {
        return Err(Error::input("policy shape does not match the world"));
    }
    if policy.layers() < steps {
        return Err(Error::input(format!(
            "policy covers {} steps, {steps} requested",
            policy.layers()
        )));
    }
    policy.check_normalized(1e-9)?;

    let mut visitation = Vec::with_capacity(steps + 1);
    let mut dist = vec![0.0; ns];
    dist[start] = 1.0;
    let mut expected_features = vec![0.0; world.num_features()];
    accumulate(world, &dist, &mut expected_features);
    for t in 0..steps {
        let mut next = vec![0.0; ns];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (a, &pa) in policy.row(t, s).iter().enumerate() {
                next[world.next_state(s, a)] += p * pa;
            }
        }
        visitation.push(std::mem::replace(&mut dist, next));
        accumulate(world, &dist, &mut expected_features);
    }
    visitation.push(dist);
    Ok(Occupancy {
        visitation,
        expected_features,
    })
}
