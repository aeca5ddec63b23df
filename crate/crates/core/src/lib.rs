// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Post-routing qubit layout selection.
//!
//! The pipeline turns a routed circuit into an interaction graph, enumerates
//! its embeddings into a device coupling map, scores each embedding from
//! calibration data and remaps the circuit onto the cheapest one.

pub mod calibration;
pub mod circuit;
pub mod cli;
pub mod gen;
pub mod interaction;
pub mod noise;
pub mod scoring;
pub mod selector;
pub mod subiso;
pub mod topology;
