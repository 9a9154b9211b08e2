//! GeoJSON export of an instance and, optionally, a chosen hub line.

use serde_json::{json, Value};

use crate::error::GeoError;
use crate::model::{Instance, Node};
use crate::solver::Solution;

fn coords(node: &Node) -> Result<[f64; 2], GeoError> {
    match (node.lon, node.lat) {
        (Some(lon), Some(lat)) => Ok([lon, lat]),
        _ => Err(GeoError::MissingCoordinates {
            id: node.id,
            label: node.label.clone(),
        }),
    }
}

/// A FeatureCollection with the hub line first (when given), then one point
/// per node. Points carry the demand of served commodities leaving and
/// entering the node.
pub fn to_geojson(instance: &Instance, solution: Option<&Solution>) -> Result<Value, GeoError> {
    let n = instance.n();
    let positions: Vec<[f64; 2]> = instance.nodes().iter().map(coords).collect::<Result<_, _>>()?;
    let mut is_hub = vec![false; n];
    let mut served_out = vec![0.0; n];
    let mut served_in = vec![0.0; n];
    let mut features = Vec::with_capacity(n + 1);
    if let Some(sol) = solution {
        let nodes = sol.line.nodes();
        for &k in nodes {
            is_hub[k] = true;
        }
        for (c, a) in sol.assignment.iter().enumerate() {
            if a.is_some() {
                let com = instance.commodities()[c];
                served_out[com.origin] += sol.demand[c];
                served_in[com.destination] += sol.demand[c];
            }
        }
        let line: Vec<[f64; 2]> = nodes.iter().map(|&k| positions[k]).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": line },
            "properties": {
                "role": "hub_line",
                "nodes": nodes,
                "objective": sol.objective,
            },
        }));
    }
    for (k, node) in instance.nodes().iter().enumerate() {
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": positions[k] },
            "properties": {
                "id": node.id,
                "role": if is_hub[k] { "hub" } else { "node" },
                "label": node.label,
                "population": node.population,
                "served_demand_in": served_in[k],
                "served_demand_out": served_out[k],
            },
        }));
    }
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

pub fn geojson_string(instance: &Instance, solution: Option<&Solution>) -> Result<String, GeoError> {
    let value = to_geojson(instance, solution)?;
    Ok(serde_json::to_string_pretty(&value).expect("json values always serialize") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{complete_edges, unordered_pairs, Params, TimeMatrix};

    fn instance(with_coords: bool) -> Instance {
        let nodes = (0..3)
            .map(|i| {
                let node = Node::new(i, format!("n{i}"), 1.0);
                if with_coords {
                    node.with_coords(-73.5 - i as f64 * 0.01, 45.5)
                } else {
                    node
                }
            })
            .collect();
        let mut t = TimeMatrix::empty(3);
        t.set_symmetric(0, 1, 1.0);
        t.set_symmetric(1, 2, 1.0);
        t.set_symmetric(0, 2, 2.0);
        let params = Params { p: 2, ..Params::default() };
        Instance::new(nodes, complete_edges(3), t, unordered_pairs(3), params).unwrap()
    }

    #[test]
    fn points_only_without_solution() {
        let v = to_geojson(&instance(true), None).unwrap();
        let features = v["features"].as_array().unwrap();
        assert_eq!(features.len(), 3);
        assert!(features.iter().all(|f| f["geometry"]["type"] == "Point"));
        assert_eq!(features[2]["geometry"]["coordinates"][0].as_f64(), Some(-73.52));
    }

    #[test]
    fn missing_coordinates_name_the_node() {
        let err = to_geojson(&instance(false), None).unwrap_err();
        assert_eq!(err.to_string(), "node 0 (n0) has no coordinates");
    }
}
