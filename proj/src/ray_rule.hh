// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbt/attenuation.hh"
#include "cbt/error.hh"
#include "cbt/quadrature.hh"

namespace cbt::detail
{
//! Gauss-Legendre panel on [0, 1] with the spectral integration matrix
//! S[k][j] = int_0^{xi_k} l_j.
class RayRule
{
  public:
    explicit RayRule(RayQuadrature const& quad) : quad_(quad)
    {
        if (quad.nodes_per_panel < 1 || quad.nodes_per_panel > 8
            || quad.panels_per_unit_length < 1)
        {
            throw Error(ErrorCode::InvalidArgument, "attenuation_solver",
                        "ray quadrature needs 1..8 nodes per panel and a positive panel density");
        }
        auto const gl = gauss_legendre(quad.nodes_per_panel);
        int const n = quad.nodes_per_panel;
        for (int k = 0; k < n; ++k)
        {
            xi_.push_back(0.5 * (gl.nodes[k] + 1));
            w_.push_back(0.5 * gl.weights[k]);
        }
        s_.assign(n * n, 0.0);
        for (int k = 0; k < n; ++k)
        {
            for (int j = 0; j < n; ++j)
            {
                // Lagrange basis of degree n - 1 is integrated exactly by n points
                double sum = 0;
                for (int q = 0; q < n; ++q)
                {
                    double const z = xi_[k] * xi_[q];
                    double l = 1;
                    for (int i = 0; i < n; ++i)
                    {
                        if (i != j)
                            l *= (z - xi_[i]) / (xi_[j] - xi_[i]);
                    }
                    sum += w_[q] * l;
                }
                s_[k * n + j] = xi_[k] * sum;
            }
        }
    }

    int size() const { return static_cast<int>(xi_.size()); }
    RayQuadrature const& quad() const { return quad_; }

    /*!
     * Integrate int_0^t exp(-int_0^s sigma) source(s) ds.
     *
     * sigma(s) and source(s) are evaluated at the panel nodes; the nested
     * optical depth reuses the same nodes.
     */
    template<class SigmaFn, class SourceFn>
    double integrate(double t, SigmaFn&& sigma, SourceFn&& source, double const* sigma_constant) const
    {
        if (!(t > 0))
            return 0;
        int const n = this->size();
        double sig[8];
        double tau[8];
        double result = 0;
        double depth = 0;
        double s0 = 0;
        double sigma_est = sigma_constant ? std::abs(*sigma_constant) : std::abs(sigma(0.0));
        int panel = 0;
        double const base = 1.0 / quad_.panels_per_unit_length;
        while (s0 < t)
        {
            double len;
            if (quad_.fixed_panels > 0)
            {
                if (panel == quad_.fixed_panels)
                    break;
                len = t / quad_.fixed_panels;
            }
            else
            {
                len = base;
                if (sigma_est * len > quad_.max_panel_optical_depth)
                    len = quad_.max_panel_optical_depth / sigma_est;
                if (t - s0 < len * (1 + 1e-12))
                    len = t - s0;
            }
            if (sigma_constant)
            {
                double const sc = *sigma_constant;
                for (int k = 0; k < n; ++k)
                {
                    double const s = s0 + len * xi_[k];
                    result += len * w_[k] * std::exp(-sc * s) * source(s);
                }
                depth = sc * (s0 + len);
            }
            else
            {
                double panel_depth = 0;
                sigma_est = 0;
                for (int j = 0; j < n; ++j)
                {
                    sig[j] = sigma(s0 + len * xi_[j]);
                    panel_depth += w_[j] * sig[j];
                    sigma_est = std::max(sigma_est, std::abs(sig[j]));
                }
                for (int k = 0; k < n; ++k)
                {
                    double acc = 0;
                    for (int j = 0; j < n; ++j)
                        acc += s_[k * n + j] * sig[j];
                    tau[k] = depth + len * acc;
                }
                for (int k = 0; k < n; ++k)
                    result += len * w_[k] * std::exp(-tau[k]) * source(s0 + len * xi_[k]);
                depth += len * panel_depth;
            }
            s0 += len;
            ++panel;
            if (depth > quad_.optical_cutoff)
                break;
            if (quad_.fixed_panels <= 0 && t - s0 <= 1e-14 * t)
                break;
        }
        return result;
    }

    std::vector<double> const& xi() const { return xi_; }
    std::vector<double> const& w() const { return w_; }
    double s(int k, int j) const { return s_[k * this->size() + j]; }

  private:
    RayQuadrature quad_;
    std::vector<double> xi_;
    std::vector<double> w_;
    std::vector<double> s_;
};

}  // namespace cbt::detail
