//! Per-commodity profit upper bounds from the time-ordered path stream.

use crate::auxgraph::AuxGraph;
use crate::error::PathError;
use crate::gravity::profit;
use crate::model::Problem;

use super::yen::k_shortest_simple_paths;
use super::{candidate_from_aux, CandidatePath};

#[derive(Debug, Clone, PartialEq)]
pub struct CommodityBound {
    pub commodity: crate::model::Commodity,
    pub ub: f64,
    /// Path attaining the bound when it is a genuine hub path.
    pub witness: Option<CandidatePath>,
    /// The path stream hit its cap; `ub` is the profit at the shortest time seen.
    pub capped: bool,
}

/// Walk paths in time order and stop at the first one fast enough with at
/// most `p` hubs.
pub fn commodity_upper_bound(
    problem: &Problem,
    aux: &AuxGraph,
    k_cap: usize,
) -> Result<CommodityBound, PathError> {
    let commodity = aux.commodity();
    let c = problem
        .instance
        .commodity_index(commodity)
        .ok_or(PathError::UnknownCommodity(commodity.origin, commodity.destination))?;
    let term = problem.profit_term(c);
    let t_direct = aux.t_direct();
    let p = problem.params().p;
    let mut bound = CommodityBound {
        commodity,
        ub: 0.0,
        witness: None,
        capped: false,
    };
    let mut best_time: Option<f64> = None;
    for item in k_shortest_simple_paths(aux, k_cap) {
        match item {
            Ok(path) => {
                best_time.get_or_insert(path.time);
                if path.time >= t_direct {
                    break;
                }
                if path.nodes.len() - 2 <= p {
                    bound.ub = profit(&term, path.time).unwrap_or(0.0).max(0.0);
                    if path.nodes.len() >= 4 {
                        bound.witness = Some(candidate_from_aux(problem, aux, c, &path.nodes));
                    }
                    break;
                }
            }
            Err(PathError::Capped(_)) => {
                bound.capped = true;
                bound.ub = match best_time {
                    Some(t) if t < t_direct => profit(&term, t).unwrap_or(0.0).max(0.0),
                    _ => 0.0,
                };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(bound)
}
