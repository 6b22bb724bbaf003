use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::graph::Graph;
use super::weights::Provenance;
use crate::error::{data, Result};

/// One row of a fund holdings table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holding {
    pub fund: u64,
    /// Zero-based stock (node) index.
    pub stock: usize,
    pub shares: f64,
    pub price: f64,
    pub shares_outstanding: f64,
}

/// Fund common-ownership graph. Two stocks are linked when at least one fund
/// holds both; the link weight is
/// `Σ_f (S_i^f P_i + S_j^f P_j) / (S_i P_i + S_j P_j)` over the common funds.
pub fn fcap_graph(n: usize, holdings: &[Holding]) -> Result<Graph> {
    let mut market: Vec<Option<(f64, f64)>> = alloc::vec![None; n];
    let mut by_fund: BTreeMap<u64, BTreeMap<usize, f64>> = BTreeMap::new();
    for (row, h) in holdings.iter().enumerate() {
        let line = row + 1;
        if h.stock >= n {
            return Err(data(format!("holding {line}: stock {} outside 1..={n}", h.stock + 1)));
        }
        if !(h.shares >= 0.0) || !(h.price > 0.0) || !(h.shares_outstanding > 0.0) {
            return Err(data(format!("holding {line}: shares must be >= 0, price and shares outstanding > 0")));
        }
        match market[h.stock] {
            None => market[h.stock] = Some((h.price, h.shares_outstanding)),
            Some(m) if m == (h.price, h.shares_outstanding) => {}
            Some(_) => {
                return Err(data(format!("holding {line}: inconsistent price or shares outstanding for stock {}", h.stock + 1)))
            }
        }
        if h.shares == 0.0 {
            continue;
        }
        if by_fund.entry(h.fund).or_default().insert(h.stock, h.shares).is_some() {
            return Err(data(format!("holding {line}: fund {} lists stock {} twice", h.fund, h.stock + 1)));
        }
    }
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for positions in by_fund.values() {
        let held: Vec<(usize, f64)> = positions.iter().map(|(&s, &q)| (s, q)).collect();
        for (a, &(i, qi)) in held.iter().enumerate() {
            let (pi, si) = market[i].expect("seen above");
            for &(j, qj) in &held[a + 1..] {
                let (pj, sj) = market[j].expect("seen above");
                *weights.entry((i, j)).or_insert(0.0) += (qi * pi + qj * pj) / (si * pi + sj * pj);
            }
        }
    }
    let mut g = Graph::new(n).with_provenance(Provenance::new("fcap").param("funds", by_fund.len()));
    for ((i, j), w) in weights {
        g.add_edge(i, j, w)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn h(fund: u64, stock: usize, shares: f64, price: f64, out: f64) -> Holding {
        Holding { fund, stock, shares, price, shares_outstanding: out }
    }

    #[test]
    fn single_fund_owning_everything_gives_one() {
        let g = fcap_graph(2, &[h(1, 0, 10.0, 2.0, 10.0), h(1, 1, 5.0, 4.0, 5.0)]).unwrap();
        assert_eq!(g.weight(0, 1), Some(1.0));
    }

    #[test]
    fn two_overlapping_funds_sum() {
        let rows = [
            h(1, 0, 10.0, 2.0, 10.0),
            h(1, 1, 5.0, 4.0, 5.0),
            h(2, 0, 10.0, 2.0, 10.0),
            h(2, 1, 5.0, 4.0, 5.0),
        ];
        let g = fcap_graph(2, &rows).unwrap();
        let direct = (10.0 * 2.0 + 5.0 * 4.0) / (10.0 * 2.0 + 5.0 * 4.0) * 2.0;
        assert_eq!(g.weight(0, 1), Some(direct));
        assert_eq!(direct, 2.0);
    }

    #[test]
    fn partial_holdings_formula() {
        // fund 7 holds 3 of 10 shares at 2.0 and 1 of 4 shares at 5.0
        let g = fcap_graph(3, &[h(7, 0, 3.0, 2.0, 10.0), h(7, 2, 1.0, 5.0, 4.0)]).unwrap();
        let expected = (3.0 * 2.0 + 1.0 * 5.0) / (10.0 * 2.0 + 4.0 * 5.0);
        assert_eq!(g.weight(0, 2), Some(expected));
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn inconsistent_and_duplicate_rows() {
        assert!(matches!(fcap_graph(2, &[h(1, 0, 1.0, 2.0, 10.0), h(2, 0, 1.0, 3.0, 10.0)]), Err(Error::Data(_))));
        assert!(matches!(fcap_graph(2, &[h(1, 0, 1.0, 2.0, 10.0), h(1, 0, 2.0, 2.0, 10.0)]), Err(Error::Data(_))));
        assert!(matches!(fcap_graph(2, &[h(1, 0, -1.0, 2.0, 10.0)]), Err(Error::Data(_))));
    }
}
