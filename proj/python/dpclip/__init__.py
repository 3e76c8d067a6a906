# Copyright 2026 The dpclip Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Differentially private clipped SGD for heavy-tailed data."""

from dpclip._dpclip import (
    ConfigError,
    InputError,
    RunError,
    calibrate_sigma,
    calibrate_sigma_strong,
    clip,
    default_stage_count,
    deviation_bound,
    min_inner_iterations,
    parse_libsvm,
    recombine_stages,
    run_quadratic,
    run_synthetic,
    schedule_bounded,
    schedule_unbounded,
    split_budget,
    suggest_iterations,
)

__all__ = [
    "ConfigError",
    "InputError",
    "RunError",
    "calibrate_sigma",
    "calibrate_sigma_strong",
    "clip",
    "default_stage_count",
    "deviation_bound",
    "min_inner_iterations",
    "parse_libsvm",
    "recombine_stages",
    "run_quadratic",
    "run_synthetic",
    "schedule_bounded",
    "schedule_unbounded",
    "split_budget",
    "suggest_iterations",
]
