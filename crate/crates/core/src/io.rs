//! Line-oriented text formats. Reals are written in the shortest decimal
//! that parses back to the same `f64`, so writing a parsed canonical file
//! reproduces it byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::cochain::Cochain;
use crate::complex::{MetricComplex, Simplex};
use crate::contract::MatrixComplex;
use crate::error::{Error, Result};
use crate::mollify::GridForm;
use crate::polyform::{BaryTerm, PolyForm};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank lines with their one-based numbers; `#` starts a comment.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, format!("cannot parse {tok:?}")))
}

fn header<'a>(it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    match it.next() {
        Some((ln, toks)) if toks[0] == key => Ok((ln, toks[1..].to_vec())),
        Some((ln, toks)) => Err(parse_err(ln, format!("expected `{key}`, found `{}`", toks[0]))),
        None => Err(parse_err(0, format!("missing `{key}` header"))),
    }
}

fn single<T: FromStr>(rest: &[&str], ln: usize, key: &str) -> Result<T> {
    match rest {
        [v] => num(v, ln),
        _ => Err(parse_err(ln, format!("`{key}` takes one value"))),
    }
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// `dim <d>` (ambient dimension), `vertices`, then `simplices` listing the
/// maximal simplices.
pub fn write_complex(k: &MetricComplex) -> String {
    let mut s = format!("dim {}\nvertices\n", k.ambient_dim());
    for &id in k.vertex_ids() {
        let c = k.coords(id).expect("own vertex");
        if c.is_empty() {
            let _ = writeln!(s, "{id}");
        } else {
            let _ = writeln!(s, "{id} {}", join(c));
        }
    }
    s.push_str("simplices\n");
    for t in k.maximal_simplices() {
        let _ = writeln!(s, "{}", join(t.vertices()));
    }
    s
}

pub fn read_complex(text: &str) -> Result<MetricComplex> {
    let mut it = lines(text);
    let (ln, rest) = header(&mut it, "dim")?;
    let d: usize = single(&rest, ln, "dim")?;
    let (_, rest) = header(&mut it, "vertices")?;
    if !rest.is_empty() {
        return Err(parse_err(ln, "`vertices` takes no values"));
    }
    let mut verts = Vec::new();
    let mut tops = Vec::new();
    let mut in_simplices = false;
    for (ln, toks) in it {
        if toks == ["simplices"] {
            if in_simplices {
                return Err(parse_err(ln, "repeated `simplices` section"));
            }
            in_simplices = true;
            continue;
        }
        if in_simplices {
            tops.push(toks.iter().map(|t| num(t, ln)).collect::<Result<Vec<usize>>>()?);
        } else {
            let id: usize = num(toks[0], ln)?;
            let c = toks[1..].iter().map(|t| num(t, ln)).collect::<Result<Vec<f64>>>()?;
            if c.len() != d {
                return Err(parse_err(ln, format!("vertex {id} has {} coordinates, expected {d}", c.len())));
            }
            verts.push((id, c));
        }
    }
    if !in_simplices {
        return Err(parse_err(0, "missing `simplices` section"));
    }
    MetricComplex::build(verts, &tops)
}

/// `degree <k>`, then `<v0> ... <vk> <value>` per nonzero entry.
pub fn write_cochain(c: &Cochain<'_>) -> String {
    let mut s = format!("degree {}\n", c.degree());
    for (key, v) in c.iter() {
        let _ = writeln!(s, "{} {v}", join(key));
    }
    s
}

pub fn read_cochain<'a>(text: &str, k: &'a MetricComplex) -> Result<Cochain<'a>> {
    let mut it = lines(text);
    let (ln, rest) = header(&mut it, "degree")?;
    let deg: usize = single(&rest, ln, "degree")?;
    let mut c = Cochain::zero(k, deg);
    for (ln, toks) in it {
        if toks.len() != deg + 2 {
            return Err(parse_err(ln, format!("a {deg}-cochain entry has {} fields", deg + 2)));
        }
        let mut key = toks[..=deg].iter().map(|t| num(t, ln)).collect::<Result<Vec<usize>>>()?;
        let v: f64 = num(toks[deg + 1], ln)?;
        // unsorted keys carry the orientation of their permutation
        let sign = permutation_sign(&mut key);
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(ln, "repeated vertex"));
        }
        c.set(&key, sign * v).map_err(|e| parse_err(ln, e.to_string()))?;
    }
    Ok(c)
}

/// Sorts in place and returns the sign of the sorting permutation.
fn permutation_sign(v: &mut [usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// `degree <k>`, then per piece `simplex <ids>` followed by terms
/// `<coeff> <e_0> ... <e_m> <i_1> ... <i_k>` meaning
/// `coeff t_0^{e_0} ... t_m^{e_m} dt_{i_1} ^ ... ^ dt_{i_k}`.
pub fn write_polyform(w: &PolyForm) -> String {
    let mut s = format!("degree {}\n", w.degree());
    for (t, local) in w.pieces() {
        let _ = writeln!(s, "simplex {}", join(t.vertices()));
        for term in local.to_barycentric() {
            let mut line = format!("{} {}", term.coeff, join(&term.exps));
            if !term.diffs.is_empty() {
                line.push(' ');
                line.push_str(&join(&term.diffs));
            }
            let _ = writeln!(s, "{line}");
        }
    }
    s
}

pub fn read_polyform(text: &str, k: &MetricComplex) -> Result<PolyForm> {
    let mut it = lines(text);
    let (ln, rest) = header(&mut it, "degree")?;
    let deg: usize = single(&rest, ln, "degree")?;
    let mut blocks: Vec<(Simplex, Vec<BaryTerm>)> = Vec::new();
    for (ln, toks) in it {
        if toks[0] == "simplex" {
            let ids = toks[1..].iter().map(|t| num(t, ln)).collect::<Result<Vec<usize>>>()?;
            let t = Simplex::new(ids).map_err(|e| parse_err(ln, e.to_string()))?;
            blocks.push((t, Vec::new()));
            continue;
        }
        let Some((t, terms)) = blocks.last_mut() else {
            return Err(parse_err(ln, "term before any `simplex` line"));
        };
        let m = t.dim();
        if toks.len() != 1 + (m + 1) + deg {
            return Err(parse_err(ln, format!("a term on a {m}-simplex has {} fields", m + 2 + deg)));
        }
        let coeff: f64 = num(toks[0], ln)?;
        let exps = toks[1..=m + 1].iter().map(|x| num(x, ln)).collect::<Result<Vec<u32>>>()?;
        let diffs = toks[m + 2..].iter().map(|x| num(x, ln)).collect::<Result<Vec<usize>>>()?;
        terms.push(BaryTerm::new(coeff, exps, diffs));
    }
    PolyForm::from_barycentric(k, deg, &blocks)
}

/// `n k h`, then one line per component with its node values in row-major order.
pub fn write_gridform(g: &GridForm) -> String {
    let mut s = format!("{} {} {}\n", g.n(), g.degree(), g.spacing());
    for c in g.components() {
        let _ = writeln!(s, "{}", join(c));
    }
    s
}

pub fn read_gridform(text: &str) -> Result<GridForm> {
    let mut it = lines(text);
    let (ln, head) = it.next().ok_or_else(|| parse_err(0, "empty grid file"))?;
    let [n, k, h] = head.as_slice() else {
        return Err(parse_err(ln, "header must be `n k h`"));
    };
    let (n, k, h): (usize, usize, f64) = (num(n, ln)?, num(k, ln)?, num(h, ln)?);
    let mut comps = Vec::new();
    for (ln, toks) in it {
        comps.push(toks.iter().map(|t| num(t, ln)).collect::<Result<Vec<f64>>>()?);
    }
    GridForm::from_components(n, h, k, comps)
}

/// `dims <d_0> ... <d_n>`, then per degree `D <i> <rows> <cols>` and its rows.
pub fn write_matrix_complex(m: &MatrixComplex) -> String {
    let mut s = format!("dims {}\n", join(m.dims()));
    for (i, d) in m.maps().iter().enumerate() {
        let _ = writeln!(s, "D {i} {} {}", d.nrows(), d.ncols());
        for r in 0..d.nrows() {
            let _ = writeln!(s, "{}", join(d.row(r).iter()));
        }
    }
    s
}

pub fn read_matrix_complex(text: &str) -> Result<MatrixComplex> {
    let mut it = lines(text).peekable();
    let (ln, rest) = header(&mut it, "dims")?;
    let dims = rest.iter().map(|t| num(t, ln)).collect::<Result<Vec<usize>>>()?;
    let mut maps = Vec::new();
    while let Some((ln, toks)) = it.next() {
        let [tag, i, r, c] = toks.as_slice() else {
            return Err(parse_err(ln, "expected `D <i> <rows> <cols>`"));
        };
        let (i, r, c): (usize, usize, usize) = (num(i, ln)?, num(r, ln)?, num(c, ln)?);
        if *tag != "D" || i != maps.len() {
            return Err(parse_err(ln, format!("expected `D {}`", maps.len())));
        }
        let mut entries = Vec::with_capacity(r * c);
        for _ in 0..r {
            let (ln, row) = it.next().ok_or_else(|| parse_err(ln, "missing matrix rows"))?;
            if row.len() != c {
                return Err(parse_err(ln, format!("row has {} entries, expected {c}", row.len())));
            }
            for t in row {
                entries.push(num::<f64>(t, ln)?);
            }
        }
        maps.push(DMatrix::from_row_slice(r, c, &entries));
    }
    MatrixComplex::new(dims, maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{regular_simplex, simplex_boundary};

    const TRIANGLE: &str = "dim 2\nvertices\n0 0 0\n1 1 0\n2 0.5 0.8660254037844386\nsimplices\n0 1 2\n";

    #[test]
    fn complex_canonical() {
        let k = read_complex(TRIANGLE).unwrap();
        assert_eq!(k.count(2), 1);
        assert_eq!(write_complex(&k), TRIANGLE);
        let b = simplex_boundary(3);
        assert_eq!(read_complex(&write_complex(&b)).unwrap(), b);
    }

    #[test]
    fn complex_errors() {
        assert!(matches!(read_complex("dim 2\nvertices\n0 1\nsimplices\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_complex("dim x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_complex("dim 1\nvertices\n0 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(read_complex("dim 1\nvertices\n0 0\nsimplices\n0 4\n"), Err(Error::MissingVertex(4))));
    }

    #[test]
    fn cochain_orientation() {
        let k = regular_simplex(2);
        let c = read_cochain("degree 1\n1 0 2.5\n1 2 -1\n", &k).unwrap();
        assert_eq!(c.get(&[0, 1]), -2.5);
        assert_eq!(write_cochain(&c), "degree 1\n0 1 -2.5\n1 2 -1\n");
        assert!(read_cochain("degree 1\n0 0 1\n", &k).is_err());
        assert!(read_cochain("degree 1\n0 1\n", &k).is_err());
    }

    #[test]
    fn polyform_canonical() {
        let k = regular_simplex(2);
        let w = read_polyform("degree 1\nsimplex 0 1 2\n2 1 0 0 1\n", &k).unwrap();
        let text = write_polyform(&w);
        assert_eq!(write_polyform(&read_polyform(&text, &k).unwrap()), text);
        assert_eq!(read_polyform(&text, &k).unwrap(), w);
        assert!(matches!(read_polyform("degree 1\n1 0 0 0 1\n", &k), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn grid_and_matrices() {
        let g = GridForm::sample(1, 0.5, 1, |x| vec![x[0] * x[0]]).unwrap();
        let text = write_gridform(&g);
        assert!(text.starts_with("1 1 0.5\n"));
        assert_eq!(write_gridform(&read_gridform(&text).unwrap()), text);
        let m = crate::contract::assemble(&regular_simplex(2)).unwrap();
        let text = write_matrix_complex(&m);
        assert!(text.starts_with("dims 3 3 1\nD 0 3 3\n"));
        assert_eq!(read_matrix_complex(&text).unwrap(), m);
        assert!(read_matrix_complex("dims 1 1\nD 0 1 1\n").is_err());
    }
}
