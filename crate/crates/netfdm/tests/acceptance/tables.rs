//! Published condition tables, p = 4 and L = 1, means over 100 networks.
//!
//! `TABLE[l][d]` holds the row for `LAMBDAS[l]` and `DEGREES[d]`: Eq15 then
//! Eq16 values, each for n = 100, 400, 900.

pub const LAMBDAS: [f64; 4] = [0.2, 0.3, 0.4, 0.8];
pub const DEGREES: [f64; 3] = [3.0, 5.0, 10.0];
pub const SIZES: [usize; 3] = [100, 400, 900];

pub type Row = ([f64; 3], [f64; 3]);
pub type Table = [[Row; 3]; 4];

pub const ER: Table = [
    [
        ([1.726, 1.825, 1.881], [0.038, 0.010, 0.005]),
        ([1.606, 1.699, 1.754], [0.064, 0.020, 0.010]),
        ([1.461, 1.524, 1.550], [0.149, 0.073, 0.048]),
    ],
    [
        ([2.163, 2.378, 2.454], [0.084, 0.025, 0.012]),
        ([1.994, 2.141, 2.243], [0.187, 0.079, 0.046]),
        ([1.796, 1.898, 1.938], [0.517, 0.377, 0.324]),
    ],
    [
        ([2.796, 3.059, 3.194], [0.210, 0.072, 0.038]),
        ([2.538, 2.750, 2.868], [0.561, 0.333, 0.244]),
        ([2.215, 2.371, 2.458], [1.666, 1.702, 1.786]),
    ],
    [
        ([10.944, 12.296, 13.357], [38.673, 48.659, 56.889]),
        ([9.788, 11.043, 11.562], [107.801, 225.678, 356.614]),
        ([8.178, 9.161, 9.582], [207.483, 557.337, 1024.002]),
    ],
];

pub const TRIANGLE: Table = [
    [
        ([1.719, 1.856, 1.915], [0.037, 0.010, 0.004]),
        ([1.640, 1.730, 1.782], [0.063, 0.020, 0.010]),
        ([1.476, 1.552, 1.576], [0.147, 0.071, 0.047]),
    ],
    [
        ([2.190, 2.399, 2.530], [0.079, 0.023, 0.010]),
        ([2.074, 2.213, 2.317], [0.175, 0.073, 0.042]),
        ([1.802, 1.904, 1.974], [0.511, 0.365, 0.312]),
    ],
    [
        ([2.817, 3.127, 3.357], [0.187, 0.063, 0.032]),
        ([2.593, 2.863, 2.990], [0.534, 0.298, 0.214]),
        ([2.253, 2.400, 2.488], [1.623, 1.648, 1.727]),
    ],
    [
        ([11.290, 13.286, 13.807], [30.042, 34.813, 37.950]),
        ([10.090, 11.521, 12.373], [98.917, 201.064, 308.821]),
        ([8.444, 9.356, 9.902], [202.649, 542.418, 993.015]),
    ],
];

pub const SBM: Table = [
    [
        ([1.589, 1.679, 1.742], [0.064, 0.019, 0.009]),
        ([1.504, 1.588, 1.627], [0.087, 0.030, 0.016]),
        ([1.397, 1.464, 1.499], [0.128, 0.049, 0.029]),
    ],
    [
        ([1.991, 2.129, 2.248], [0.182, 0.072, 0.042]),
        ([1.849, 1.987, 2.062], [0.263, 0.127, 0.083]),
        ([1.677, 1.791, 1.845], [0.377, 0.198, 0.146]),
    ],
    [
        ([2.531, 2.750, 2.856], [0.546, 0.295, 0.208]),
        ([2.301, 2.520, 2.622], [0.805, 0.531, 0.433]),
        ([2.038, 2.225, 2.318], [1.044, 0.743, 0.669]),
    ],
    [
        ([9.703, 10.882, 11.579], [103.269, 204.683, 310.930]),
        ([8.726, 9.581, 10.311], [130.542, 276.419, 452.188]),
        ([7.275, 8.141, 8.928], [126.650, 265.136, 439.604]),
    ],
];
