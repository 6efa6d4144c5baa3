mod adaptive;
mod assignment;
mod balanced;
mod experiments;
mod karp;
mod regions;

pub use adaptive::{adaptive_dissection, DissectionNode, DissectionTree, Process, MAX_ASPECT_RATIO, MAX_DEPTH};
pub use assignment::{
    build_assignment, e0_assignment, partition_clients, structure_violations, Assignment, ClientPartition,
    ServingPair, Target,
};
pub use balanced::{
    balanced_clustering, check_clustering, ClusterViolation, Clustering, TypedSet, CLUSTER_SIZE_CONSTANT,
};
pub use experiments::{
    cut_probability_experiment, probe_cuts, structure_portals, verify_structure_bound, CutBucket, StructureRow,
    StructureStats, CUT_BUCKETS,
};
pub use karp::{karp_dissection, perimeter_sum, KarpBox};
pub use regions::{compute_regions, place_portals, region_membership, PortalSet, Region};
