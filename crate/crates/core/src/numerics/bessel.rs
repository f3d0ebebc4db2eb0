//! Bessel functions J₀, J₁, J₂ of a real non-negative argument.
//!
//! J₀ and J₁ follow the Cephes rational approximations (interval [0, 5] plus
//! the Hankel asymptotic expansion beyond), which keep the absolute error
//! near machine precision over the whole range used here. J₂ comes from the
//! three-term recurrence, with a power series below x = 2 where the
//! recurrence would cancel.

use crate::error::{Error, Result};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Cephes polevl: coefficients from highest degree to constant term.
#[inline]
fn polevl(x: f64, coef: &[f64]) -> f64 {
    let mut acc = coef[0];
    for c in &coef[1..] {
        acc = acc * x + c;
    }
    acc
}

/// Cephes p1evl: like `polevl` with an implicit leading coefficient of 1.
#[inline]
fn p1evl(x: f64, coef: &[f64]) -> f64 {
    let mut acc = x + coef[0];
    for c in &coef[1..] {
        acc = acc * x + c;
    }
    acc
}

// J0, interval [0, 5]: (w - DR1)(w - DR2) RP(w)/RQ(w) with w = x^2.
const DR1: f64 = 5.783185962946784;
const DR2: f64 = 30.471262343662087;

static J0_RP: [f64; 4] = [
    -4.794432209782018e9,
    1.9561749194655657e12,
    -2.4924834436096772e14,
    9.708622510473064e15,
];
static J0_RQ: [f64; 8] = [
    4.99563147152651e2,
    1.737854016763747e5,
    4.844096583399621e7,
    1.1185553704535683e10,
    2.112775201154892e12,
    3.1051822985742256e14,
    3.1812195594320496e16,
    1.7108629408104315e18,
];
static J0_PP: [f64; 7] = [
    7.969367292973471e-4,
    8.283523921074408e-2,
    1.239533716464143,
    5.447250030587687,
    8.74716500199817,
    5.303240382353949,
    1.0,
];
static J0_PQ: [f64; 7] = [
    9.244088105588637e-4,
    8.562884743544745e-2,
    1.2535274390105895,
    5.470977403304171,
    8.761908832370695,
    5.306052882353947,
    1.0,
];
static J0_QP: [f64; 8] = [
    -1.1366383889846916e-2,
    -1.2825271867050931,
    -1.9553954425773597e1,
    -9.320601521237683e1,
    -1.7768116798048806e2,
    -1.4707750515495118e2,
    -5.141053267665993e1,
    -6.050143506007285,
];
static J0_QQ: [f64; 7] = [
    6.43178256118178e1,
    8.564300259769806e2,
    3.8824018360540163e3,
    7.240467741956525e3,
    5.930727011873169e3,
    2.0620933166032783e3,
    2.420057402402914e2,
];

/// Bessel function of the first kind, order zero.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 5.0 {
        let z = x * x;
        if x < 1e-5 {
            return 1.0 - z / 4.0;
        }
        return (z - DR1) * (z - DR2) * polevl(z, &J0_RP) / p1evl(z, &J0_RQ);
    }
    let w = 5.0 / x;
    let q = w * w;
    let p = polevl(q, &J0_PP) / polevl(q, &J0_PQ);
    let qq = polevl(q, &J0_QP) / p1evl(q, &J0_QQ);
    let xn = x - std::f64::consts::FRAC_PI_4;
    (p * xn.cos() - w * qq * xn.sin()) * SQRT_2_OVER_PI / x.sqrt()
}

// J1, interval [0, 5]: x (w - Z1)(w - Z2) RP(w)/RQ(w) with w = x^2.
const Z1: f64 = 1.4681970642123893e1;
const Z2: f64 = 4.92184563216946e1;

static J1_RP: [f64; 4] = [
    -8.999712257055594e8,
    4.5222829799819403e11,
    -7.274942452218183e13,
    3.682957328638529e15,
];
static J1_RQ: [f64; 8] = [
    6.208364781180543e2,
    2.5698725675774884e5,
    8.351467914319493e7,
    2.215115954797925e10,
    4.749141220799914e12,
    7.843696078762359e14,
    8.952223361846274e16,
    5.322786203326801e18,
];
static J1_PP: [f64; 7] = [
    7.621256162081731e-4,
    7.313970569409176e-2,
    1.1271960812968493,
    5.112079511468076,
    8.424045901417724,
    5.214515986823615,
    1.0,
];
static J1_PQ: [f64; 7] = [
    5.713231280725487e-4,
    6.884559087544954e-2,
    1.105142326340617,
    5.073863861286015,
    8.399855543276042,
    5.209828486823619,
    1.0,
];
static J1_QP: [f64; 8] = [
    5.108625947501766e-2,
    4.982138729512334,
    7.582382841325453e1,
    3.667796093601508e2,
    7.108563049989261e2,
    5.974896124006136e2,
    2.1168875710057213e2,
    2.5207020585802372e1,
];
static J1_QQ: [f64; 7] = [
    7.423732770356752e1,
    1.0564488603826283e3,
    4.986410583376536e3,
    9.562318924047562e3,
    7.997041604473507e3,
    2.8261927851763908e3,
    3.360936078106983e2,
];

/// Bessel function of the first kind, order one.
pub fn j1(x: f64) -> f64 {
    if x < 0.0 {
        return -j1(-x);
    }
    if x <= 5.0 {
        let z = x * x;
        return x * (z - Z1) * (z - Z2) * polevl(z, &J1_RP) / p1evl(z, &J1_RQ);
    }
    let w = 5.0 / x;
    let z = w * w;
    let p = polevl(z, &J1_PP) / polevl(z, &J1_PQ);
    let q = polevl(z, &J1_QP) / p1evl(z, &J1_QQ);
    let xn = x - 0.75 * std::f64::consts::PI;
    (p * xn.cos() - w * q * xn.sin()) * SQRT_2_OVER_PI / x.sqrt()
}

/// Bessel function of the first kind, order two. Power series below x = 2
/// (the recurrence 2 J₁/x − J₀ cancels there), recurrence above.
pub fn j2(x: f64) -> f64 {
    let x = x.abs();
    if x < 2.0 {
        // J2(x) = sum_k (-1)^k (x/2)^(2k+2) / (k! (k+2)!)
        let q = 0.25 * x * x;
        let mut term = 0.5; // 1/(0! 2!)
        let mut sum = term;
        let mut k = 0.0;
        loop {
            term *= -q / ((k + 1.0) * (k + 3.0));
            sum += term;
            k += 1.0;
            if term.abs() < 1e-18 * sum.abs().max(1e-3) || k > 30.0 {
                break;
            }
        }
        return sum * q;
    }
    2.0 * j1(x) / x - j0(x)
}

/// J of integer order 0, 1 or 2 at x ≥ 0, per the dispatch the field
/// kernels need.
pub fn bessel_j(order: u8, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("bessel_j argument {x} < 0")));
    }
    match order {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        2 => Ok(j2(x)),
        _ => Err(Error::Domain(format!("unsupported Bessel order {order}"))),
    }
}
