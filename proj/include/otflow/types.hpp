// Copyright 2026 The otflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace otflow {

//! Row-major dense matrix; rows are sample points.
template <typename Scalar>
using RowMatrixT =
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrix = RowMatrixT<double>;
using Vector = VectorT<double>;
using Index = Eigen::Index;

//! Thrown when inputs violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Non-finite or otherwise unusable numbers produced during a computation.
class NumericalError : public std::runtime_error
{
public:
  NumericalError(const std::string& what, Index row = -1, Index step = -1)
    : std::runtime_error(what)
    , row_(row)
    , step_(step)
  {}

  Index row() const { return row_; }
  Index step() const { return step_; }

private:
  Index row_;
  Index step_;
};

//! Linear solve failure in the Newton system.
class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! File system or parse failure, carrying the offending path in what().
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace otflow
