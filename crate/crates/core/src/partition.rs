use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A disjoint cover of the node universe by communities.
///
/// Communities are stored with sorted members and ordered by their smallest
/// member, so two partitions with the same blocks compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Partition {
    communities: Vec<Vec<usize>>,
    community_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition of `0..node_count`. Empty blocks are rejected.
    pub fn new(node_count: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut communities: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if communities.iter().any(Vec::is_empty) {
            return Err(Error::InvalidPartition("empty community".into()));
        }
        communities.sort_by_key(|b| b[0]);

        let mut community_of = vec![usize::MAX; node_count];
        for (c, block) in communities.iter().enumerate() {
            for &i in block {
                if i >= node_count {
                    return Err(Error::UnknownNode(i));
                }
                if community_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "node {i} assigned to more than one community"
                    )));
                }
                community_of[i] = c;
            }
        }
        if let Some(i) = community_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidPartition(format!("node {i} is not covered")));
        }
        Ok(Partition {
            communities,
            community_of,
        })
    }

    /// Builds a partition from a per-node community assignment.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self> {
        let count = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (i, &c) in assignment.iter().enumerate() {
            blocks[c].push(i);
        }
        blocks.retain(|b| !b.is_empty());
        Partition::new(assignment.len(), blocks)
    }

    pub fn singletons(node_count: usize) -> Self {
        Partition {
            communities: (0..node_count).map(|i| vec![i]).collect(),
            community_of: (0..node_count).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.community_of.len()
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn members(&self, community: usize) -> Option<&[usize]> {
        self.communities.get(community).map(Vec::as_slice)
    }

    pub fn community_of(&self, node: usize) -> Result<usize> {
        self.community_of
            .get(node)
            .copied()
            .ok_or(Error::UnknownNode(node))
    }

    pub fn assignment(&self) -> &[usize] {
        &self.community_of
    }

    pub fn community_size_of(&self, node: usize) -> Result<usize> {
        Ok(self.communities[self.community_of(node)?].len())
    }

    pub fn same_community(&self, i: usize, j: usize) -> bool {
        self.community_of[i] == self.community_of[j]
    }
}

impl TryFrom<Vec<Vec<usize>>> for Partition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = blocks.iter().map(Vec::len).sum();
        Partition::new(n, blocks)
    }
}

impl From<Partition> for Vec<Vec<usize>> {
    fn from(p: Partition) -> Self {
        p.communities
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let a = Partition::new(4, vec![vec![3, 2], vec![1, 0]]).unwrap();
        let b = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.community_of(3).unwrap(), 1);
    }

    #[test]
    fn rejects_overlap_and_gaps() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(matches!(
            Partition::new(2, vec![vec![0, 5]]),
            Err(Error::UnknownNode(5))
        ));
    }

    #[test]
    fn assignment_round_trip() {
        let p = Partition::from_assignment(&[1, 1, 0, 0, 2]).unwrap();
        assert_eq!(p.communities(), &[vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(Partition::from_assignment(p.assignment()).unwrap(), p);
    }
}
