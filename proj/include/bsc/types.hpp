#pragma once

#include <Eigen/Dense>

#include <vector>

namespace bsc {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using RowVectorXd = RowVector<double>;

/// Index into a LabelScheme's label list.
using Label = int;
using LabelSequence = std::vector<Label>;

/// Previous-label placeholder for the first token of a document.
inline constexpr Label kNoLabel = -1;
/// The outside label is always index 0.
inline constexpr Label kOutside = 0;

}  // namespace bsc
