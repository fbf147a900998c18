//! Built-in ambient toric Fano manifolds.

use std::sync::Arc;

use thiserror::Error;

use crate::toric::{validate_fan, Fan, ToricError, ToricFano};
use crate::IVec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownCatalogEntry(String),
    #[error(transparent)]
    Toric(#[from] ToricError),
}

/// Largest dimension served by the catalog.
pub const MAX_DIM: usize = 8;

/// Name of the `P(O + O + O(1) + O(1))` bundle over `P^2`.
pub const BUNDLE_P2: &str = "bundle-P2";
const BUNDLE_P2_ALIAS: &str = "Ex5.3-bundle";

/// The standard fan of `P^n`: rays `e_1, ..., e_n, -(e_1 + ... + e_n)`.
pub fn projective_fan(n: usize) -> Fan {
    let mut rays: Vec<IVec> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect();
    rays.push(vec![-1; n]);
    let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
    Fan::new(rays, cones)
}

pub fn product_fan(a: &Fan, b: &Fan) -> Fan {
    let (da, db) = (a.dim(), b.dim());
    let mut rays: Vec<IVec> = a.rays.iter().map(|r| [r.clone(), vec![0; db]].concat()).collect();
    rays.extend(b.rays.iter().map(|r| [vec![0; da], r.clone()].concat()));
    let off = a.rays.len();
    let cones = a
        .max_cones
        .iter()
        .flat_map(|ca| b.max_cones.iter().map(move |cb| [ca.clone(), cb.iter().map(|i| i + off).collect()].concat()))
        .collect();
    Fan::new(rays, cones)
}

/// `P(O^2 + O(1)^2)` over `P^2`, a smooth toric Fano 5-fold with seven rays.
pub fn bundle_p2_fan() -> Fan {
    let rays = vec![
        vec![1, 0, 1, 1, 0],
        vec![0, 1, 0, 0, 0],
        vec![-1, -1, 0, 0, 0],
        vec![0, 0, 1, 0, 0],
        vec![0, 0, 0, 1, 0],
        vec![0, 0, 0, 0, 1],
        vec![0, 0, -1, -1, -1],
    ];
    let mut cones = Vec::new();
    for base in 0..3 {
        for fibre in 3..7 {
            cones.push((0..7).filter(|&i| i != base && i != fibre).collect());
        }
    }
    Fan::new(rays, cones)
}

fn parse_product(name: &str) -> Option<Vec<usize>> {
    let dims: Option<Vec<usize>> = name
        .split('x')
        .map(|p| p.strip_prefix('P').and_then(|d| d.parse::<usize>().ok()).filter(|&d| d >= 1))
        .collect();
    let dims = dims?;
    (dims.iter().sum::<usize>() <= MAX_DIM).then_some(dims)
}

/// Fan for a catalog name: `P<n>`, products such as `P1xP3`, or `bundle-P2`.
pub fn catalog(name: &str) -> Result<Fan, CatalogError> {
    if name == BUNDLE_P2 || name == BUNDLE_P2_ALIAS {
        return Ok(bundle_p2_fan());
    }
    let dims = parse_product(name).ok_or_else(|| CatalogError::UnknownCatalogEntry(name.to_string()))?;
    let mut fan = projective_fan(dims[0]);
    for &d in &dims[1..] {
        fan = product_fan(&fan, &projective_fan(d));
    }
    Ok(fan)
}

/// Validated ambient for a catalog name.
pub fn ambient(name: &str) -> Result<Arc<ToricFano>, CatalogError> {
    Ok(Arc::new(validate_fan(&catalog(name)?)?))
}

/// Every catalog entry of dimension `d`: products with nonincreasing factors, then the bundle.
pub fn names_of_dim(d: usize) -> Vec<String> {
    fn rec(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<String>) {
        if left == 0 {
            out.push(cur.iter().map(|k| format!("P{k}")).collect::<Vec<_>>().join("x"));
            return;
        }
        for k in (1..=left.min(max)).rev() {
            cur.push(k);
            rec(left - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if (1..=MAX_DIM).contains(&d) {
        rec(d, d, &mut Vec::new(), &mut out);
    }
    if d == 5 {
        out.push(BUNDLE_P2.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::ci_degree;

    #[test]
    fn names_resolve() {
        assert_eq!(catalog("P4").unwrap().rays.len(), 5);
        let f = catalog("P1xP3").unwrap();
        assert_eq!(f.rays.len(), 6);
        let y = ambient("P1xP3").unwrap();
        assert_eq!(ci_degree(&y, &[]).unwrap(), 512);
        assert_eq!(catalog(BUNDLE_P2), catalog("Ex5.3-bundle"));
        let b = ambient(BUNDLE_P2).unwrap();
        assert_eq!(b.fan.rays.len(), 7);
        assert_eq!(b.pic_rank(), 2);
        for bad in ["P9", "P0", "Q4", "P4xP5", "", "bundle"] {
            assert!(matches!(catalog(bad), Err(CatalogError::UnknownCatalogEntry(_))), "{bad}");
        }
    }

    #[test]
    fn names_by_dimension() {
        assert_eq!(names_of_dim(3), vec!["P3", "P2xP1", "P1xP1xP1"]);
        let five = names_of_dim(5);
        assert_eq!(five.len(), 8);
        for n in &five {
            assert_eq!(ambient(n).unwrap().dim(), 5, "{n}");
        }
    }
}
