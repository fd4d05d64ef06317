//! Engine for a framing-effect questionnaire played as a small adventure
//! game: seven framed decision tasks, a deterministic session state
//! machine, an append-only response store, and the analysis that turns
//! stored answers into framing and reflection tests.

pub mod analysis;
pub mod bank;
pub mod consequence;
pub mod decision;
pub mod session;
pub mod store;

pub use bank::{bank, FrameLabel, TaskId, Version};
pub use session::{Choice, Demographics, SessionId, SessionState};
pub use store::{JsonlStore, ResponseRecord, ResponseStore};
