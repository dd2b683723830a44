use ndarray::Array2;

use crate::error::{Error, Result};

/// Foreground pixels with at least one background 4-neighbour. Pixels
/// outside the image count as background.
pub fn boundary(mask: &Array2<bool>) -> Array2<bool> {
    let (h, w) = mask.dim();
    Array2::from_shape_fn((h, w), |(r, c)| {
        if !mask[[r, c]] {
            return false;
        }
        r == 0 || c == 0 || r + 1 == h || c + 1 == w || !mask[[r - 1, c]] || !mask[[r + 1, c]] || !mask[[r, c - 1]] || !mask[[r, c + 1]]
    })
}

// Lower envelope of parabolas (Felzenszwalb and Huttenlocher). Inputs and
// outputs are integer-valued, so the result is exact.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    let mut first = None;
    for (q, &fq) in f.iter().enumerate() {
        if fq.is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(start) = first else {
        out.fill(f64::INFINITY);
        return;
    };
    v[0] = start;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in start + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * (qf - p));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from every pixel to the nearest `true` pixel;
/// infinite everywhere when there is none.
pub fn squared_distance_transform(sites: &Array2<bool>) -> Array2<f64> {
    let (h, w) = sites.dim();
    let mut d = sites.mapv(|s| if s { 0.0 } else { f64::INFINITY });
    let n = h.max(w);
    let (mut buf, mut out, mut v, mut z) = (vec![0.0; n], vec![0.0; n], vec![0usize; n], vec![0.0; n + 1]);
    for mut col in d.columns_mut() {
        buf[..h].iter_mut().zip(col.iter()).for_each(|(b, &x)| *b = x);
        edt_1d(&buf[..h], &mut out[..h], &mut v, &mut z);
        col.iter_mut().zip(&out[..h]).for_each(|(x, &o)| *x = o);
    }
    for mut row in d.rows_mut() {
        buf[..w].iter_mut().zip(row.iter()).for_each(|(b, &x)| *b = x);
        edt_1d(&buf[..w], &mut out[..w], &mut v, &mut z);
        row.iter_mut().zip(&out[..w]).for_each(|(x, &o)| *x = o);
    }
    d
}

fn directed(from: &Array2<bool>, to_dt: &Array2<f64>) -> f64 {
    from.indexed_iter().filter(|(_, &b)| b).map(|(ix, _)| to_dt[ix]).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the boundary sets of `a` and `b`.
pub fn hausdorff(a: &Array2<bool>, b: &Array2<bool>) -> Result<f64> {
    super::check_dims(a, b)?;
    let (ba, bb) = (boundary(a), boundary(b));
    if !ba.iter().any(|&x| x) || !bb.iter().any(|&x| x) {
        return Err(Error::UndefinedMetric("Hausdorff distance with an empty mask".into()));
    }
    let sq = directed(&ba, &squared_distance_transform(&bb)).max(directed(&bb, &squared_distance_transform(&ba)));
    Ok(sq.sqrt())
}
