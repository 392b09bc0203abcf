//! Cluster trees, admissibility and butterfly block partitions.

mod partition;
mod tree;

pub use partition::{
    build_block_partition, check_assumption_eta2, cluster_sequence, partition_stats,
    standard_admissible, BlockPartition, ButterflyPlan, ClusterSequence, Eta2Report,
    PartitionStats,
};
pub use tree::{build_cluster_tree, Cluster, ClusterId, ClusterTree, Support, TreeStats};
