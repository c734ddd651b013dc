#[path = "support/affine.rs"]
mod affine;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn expected_reward_equals_reward_at_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // 91 points put 4/9 and 5/9, the robot's switch points, on the grid.
    let stats = affine::check_beliefs(&mut rng, 91, 200).unwrap();
    assert_eq!(stats.beliefs, 291);
    assert_eq!(stats.ties, 2);
}
