//! Published reference values used for comparison output.

/// `(n, E[θ_n²])` rounded to six decimals.
pub const SECOND_MOMENTS: [(usize, f64); 11] = [
    (2, 1.000000),
    (5, 0.341109),
    (10, 0.265140),
    (20, 0.246645),
    (50, 0.241501),
    (100, 0.240767),
    (200, 0.240584),
    (500, 0.240532),
    (1000, 0.240525),
    (2000, 0.240523),
    (5000, 0.240523),
];

/// `E[θ²]` for the continuous limit.
pub const SECOND_MOMENT_LIMIT: f64 = 0.240523;

/// `E[θ_50^k]` for `k = 2, 4, ..., 16`.
pub const EVEN_MOMENTS_N50: [(usize, f64); 8] = [
    (2, 0.241501),
    (4, 0.109961),
    (6, 0.061465),
    (8, 0.038257),
    (10, 0.025485),
    (12, 0.017803),
    (14, 0.012885),
    (16, 0.009586),
];
