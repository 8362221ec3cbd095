use serde::{Deserialize, Serialize};

use crate::determinant::Determinant;
use crate::error::{Error, Result};

/// Default single-linkage gap, Hartree.
pub const DEFAULT_CLUSTER_TOLERANCE: f64 = 0.010;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingDeterminant {
    pub coefficient: f64,
    pub determinant: Determinant,
    /// Holes and particles relative to the reference, in orbital names.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FciAssignment {
    /// Irrep of the FCI block and the state's rank within it.
    pub irrep: u8,
    pub rank: usize,
    pub energy: f64,
    pub distance: f64,
    pub s2: f64,
    /// `|<E|Psi_ini>|^2`.
    pub overlap: f64,
    pub leading: Vec<LeadingDeterminant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCluster {
    pub mean: f64,
    /// Sample standard deviation; zero for a single member.
    pub std: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// Indices into the clustered sample list.
    pub members: Vec<usize>,
    pub assignment: Option<FciAssignment>,
}

/// Single-linkage clustering of 1-D energies: sorted neighbours further apart
/// than `tol` start a new cluster. Clusters come out by descending count, then
/// ascending mean.
pub fn cluster_samples(energies: &[f64], tol: f64) -> Result<Vec<StateCluster>> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!(
            "cluster tolerance must be positive, got {tol}"
        )));
    }
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if energies[i] - energies[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut clusters: Vec<StateCluster> = groups
        .into_iter()
        .map(|members| {
            let n = members.len() as f64;
            let mean = members.iter().map(|&i| energies[i]).sum::<f64>() / n;
            let var = if members.len() > 1 {
                members
                    .iter()
                    .map(|&i| (energies[i] - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            let mut sorted_members = members.clone();
            sorted_members.sort_unstable();
            StateCluster {
                mean,
                std: var.sqrt(),
                count: members.len(),
                min: energies[members[0]],
                max: energies[*members.last().unwrap()],
                members: sorted_members,
                assignment: None,
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.count.cmp(&a.count).then(a.mean.total_cmp(&b.mean)));
    Ok(clusters)
}
