/*
Copyright 2026 The sea-admm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Multicast beamforming for cell-free massive MIMO via semidefinite
//! relaxation, a two-level ADMM on the dual SDP, and successive elimination
//! of secondary eigendirections.

pub mod error;
pub mod linalg;
pub mod netsim;
pub mod oracle;
pub mod problem;
pub mod projection;
pub mod sea;
pub mod solver;

pub use error::{Error, Result};
