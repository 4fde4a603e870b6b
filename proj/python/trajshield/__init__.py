# Copyright 2026 The Trajshield Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Correlation-aware location privacy for trajectories."""

from trajshield._trajshield import (
    DEFAULT_CELL_SIZE_M,
    DEFAULT_TIME_STEP_S,
    GridMap,
    TrajshieldError,
    __version__,
    allocate_adjacent,
    allocate_sensitive,
    bayesian_inference,
    conditional_error,
    delta_location_set,
    ingest,
    max_dp_ratio,
    optimal_inference,
    perturbation_distribution,
    propagate,
    run_sweep,
    search_protection_set,
)

__all__ = [
    "DEFAULT_CELL_SIZE_M",
    "DEFAULT_TIME_STEP_S",
    "GridMap",
    "TrajshieldError",
    "__version__",
    "allocate_adjacent",
    "allocate_sensitive",
    "bayesian_inference",
    "conditional_error",
    "delta_location_set",
    "ingest",
    "max_dp_ratio",
    "optimal_inference",
    "perturbation_distribution",
    "propagate",
    "run_sweep",
    "search_protection_set",
]
