#ifndef WGM_TYPES_HPP
#define WGM_TYPES_HPP

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace wgm
{

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ComplexSparseMatrix = Eigen::SparseMatrix<Complex>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

}  // namespace wgm

#endif  // WGM_TYPES_HPP
