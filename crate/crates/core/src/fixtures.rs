//! The bundled three-coordinate example, as an operator and as a graph.

use crate::game::{GameGraph, MinMaxOperator};
use crate::rational::{rat, Rational};

pub const EXAMPLE_GRAPH_JSON: &str = include_str!("../fixtures/example_graph.json");
pub const EXAMPLE_OPERATOR_JSON: &str = include_str!("../fixtures/example_operator.json");

/// Rational stand-in for `2π` used by the example.
pub fn two_pi() -> Rational {
    rat(6_283_185_307, 1_000_000_000)
}

pub fn example_graph() -> GameGraph {
    serde_json::from_str(EXAMPLE_GRAPH_JSON).expect("bundled example graph parses")
}

pub fn example_operator() -> MinMaxOperator {
    serde_json::from_str(EXAMPLE_OPERATOR_JSON).expect("bundled example operator parses")
}
