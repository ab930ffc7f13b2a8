//! Conjunctive queries at submodular-width cost: free-connex decompositions,
//! width computation, per-selection rules and the final acyclic evaluation.

mod answer;
mod td;
mod width;
mod yannakakis;

pub use answer::{answer_cq, bag_atom_name, build_bag_ddrs, CqPlan, CqReport, PlanBundle, SelectionPlan};
pub use td::{dominates, enumerate_free_connex_tds, prune_dominated, trivial_td, TreeDecomposition};
pub use width::{bag_selections, candidate_tds, compute_fhtw, compute_subw, normalize_targets, subw_exhaustive, FhtwResult, SubwResult, WidthSolver};
pub use yannakakis::yannakakis;
