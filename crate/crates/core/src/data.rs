//! Link and actuator compliance of the Orthoglide prototype.
//!
//! Matrices are row-major, coordinate order `Tx Ty Tz Rx Ry Rz`, units mm/N,
//! rad/(N·mm) and mm/(N·mm) for the coupling blocks.

/// Actuator control-loop compliance, mm/N.
pub const K_CTR: f64 = 1e-5;

pub const FOOT: [[f64; 6]; 6] = [
    [2.45e-4, -2.73e-4, 0.0, 0.0, 0.0, -5.48e-6],
    [-2.73e-4, 3.24e-4, 0.0, 0.0, 0.0, 7.04e-6],
    [0.0, 0.0, 1.59e-3, 9.90e-6, -1.27e-5, 0.0],
    [0.0, 0.0, 9.90e-6, 2.07e-7, 0.0, 0.0],
    [0.0, 0.0, -1.27e-5, 0.0, 2.06e-7, 0.0],
    [-5.48e-6, 7.04e-6, 0.0, 0.0, 0.0, 1.71e-7],
];

/// One parallelogram bar, x-axis along the bar.
pub const BAR: [[f64; 6]; 6] = [
    [4.50e-5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 8.01e-2, 0.0, 0.0, 0.0, 3.98e-4],
    [0.0, 0.0, 3.64e-2, 0.0, -1.71e-4, 0.0],
    [0.0, 0.0, 0.0, 3.76e-6, 0.0, 0.0],
    [0.0, 0.0, -1.71e-4, 0.0, 1.09e-6, 0.0],
    [0.0, 3.98e-4, 0.0, 0.0, 0.0, 2.65e-6],
];

/// Parallelogram axis (the short links of length d), x-axis along the axis.
pub const AXIS: [[f64; 6]; 6] = [
    [1.99e-6, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.29e-5, 0.0, 0.0, 0.0, 2.61e-7],
    [0.0, 0.0, 1.50e-5, 0.0, -7.64e-7, 0.0],
    [0.0, 0.0, 0.0, 6.81e-8, 0.0, 0.0],
    [0.0, 0.0, -7.64e-7, 0.0, 8.23e-8, 0.0],
    [0.0, 2.61e-7, 0.0, 0.0, 0.0, 2.67e-8],
];

/// Actuator mechanics.
pub const ACT: [[f64; 6]; 6] = [
    [1.88e-6, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 3.83e-7, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 9.99e-6, 2.90e-7, -0.45e-7, 0.0],
    [0.0, 0.0, 2.90e-7, 1.55e-8, 0.0, 0.0],
    [0.0, 0.0, -0.45e-7, 0.0, 5.19e-10, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 4.86e-10],
];

/// Reported compliance summaries of the prototype at three diagonal points,
/// `(variant, point coordinate, k_tran mm/N, k_rot rad/(N·mm))`.
pub const REFERENCE_SUMMARIES: [(&str, f64, f64, f64); 6] = [
    ("puu", 0.0, 2.78e-4, 20.9e-7),
    ("puu", -73.65, 10.9e-4, 24.1e-7),
    ("puu", 126.35, 71.3e-4, 25.8e-7),
    ("prpar", 0.0, 2.78e-4, 1.94e-7),
    ("prpar", -73.65, 9.86e-4, 2.06e-7),
    ("prpar", 126.35, 21.2e-4, 2.65e-7),
];

/// Same quantities for the parallelogram variant with hinge-axis flexibility.
pub const REFERENCE_SUMMARIES_EXTENDED: [(f64, f64, f64); 3] = [
    (0.0, 2.93e-4, 2.02e-7),
    (-73.65, 10.2e-4, 2.15e-7),
    (126.35, 21.9e-4, 2.76e-7),
];
