use crate::error::{Error, Result};
use crate::matrix::{re, CMatrix};

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

pub(crate) fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidDimension("expm needs a square matrix".into()));
    }
    let n = a.nrows();
    let norm = a.norm_1();
    if !norm.is_finite() {
        return Err(Error::Numerical("expm of a non-finite matrix".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale_re(0.5f64.powi(s));

    let id = CMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut m = a6.scale_re(c6);
        m.axpy(re(c4), &a4);
        m.axpy(re(c2), &a2);
        m.axpy(re(c0), &id);
        m
    };
    let b = &B13;
    let mut u_inner = a6.matmul(&lin(b[13], b[11], b[9], 0.0));
    u_inner += &lin(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u_inner);
    let mut v = a6.matmul(&lin(b[12], b[10], b[8], 0.0));
    v += &lin(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, C64};

    #[test]
    fn exp_of_diagonal() {
        let d = [c(0.5, 1.0), c(-2.0, 0.0), c(0.0, -3.0)];
        let e = CMatrix::diag(&d).expm().unwrap();
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(-i theta sigma_y) for a large angle exercises the squaring phase
        let th = 37.3;
        let sy = CMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let e = sy.scale(c(0.0, -th)).expm().unwrap();
        let want = CMatrix::from_vec(
            2,
            2,
            vec![re(th.cos()), re(-th.sin()), re(th.sin()), re(th.cos())],
        )
        .unwrap();
        assert!((&e - &want).max_abs() < 1e-11);
    }

    #[test]
    fn exp_of_nilpotent() {
        let mut n = CMatrix::zeros(3, 3);
        n[(0, 1)] = re(2.0);
        n[(1, 2)] = re(3.0);
        let e = n.expm().unwrap();
        assert!((e[(0, 2)] - C64::new(3.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - C64::new(2.0, 0.0)).norm() < 1e-13);
    }
}
