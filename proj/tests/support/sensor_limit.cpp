// Copyright 2026 The Mollow Sensors Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sensor_limit.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace mollow::testing {

namespace {

using C = std::complex<double>;

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

SensorLimit::SensorLimit(const SystemParams& params, std::vector<SensorSpec> sensors)
    : params_(params), sensors_(std::move(sensors)) {
    Eigen::Matrix2cd s;
    s << 0, 1, 0, 0;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd h = params.detuning * s.adjoint() * s + params.rabi * (s + s.adjoint());
    const Eigen::Matrix2cd sds = s.adjoint() * s;
    const C i(0, 1);
    // Column stacking: vec(A rho B) = (B^T kron A) vec(rho).
    lsys_ = i * kron2(h.transpose(), id) - i * kron2(id, h) +
            params.gamma * (kron2(s.conjugate(), s) - 0.5 * kron2(id, sds) - 0.5 * kron2(sds.transpose(), id));
    left_sigma_ = kron2(id, s);
    right_sigma_dag_ = kron2(s.adjoint().transpose(), id);
}

const Eigen::Vector4cd& SensorLimit::block(const std::vector<int>& n, const std::vector<int>& m) {
    Key key{n, m};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const std::size_t k_count = sensors_.size();
    bool ground = true;
    for (std::size_t k = 0; k < k_count; ++k) ground = ground && n[k] == 0 && m[k] == 0;

    Eigen::Vector4cd x;
    if (ground) {
        Eigen::Matrix4cd a = lsys_;
        a.row(0) << 1, 0, 0, 1;  // trace row
        Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
        rhs(0) = 1.0;
        x = a.fullPivLu().solve(rhs);
    } else {
        C shift = 0.0;
        Eigen::Vector4cd source = Eigen::Vector4cd::Zero();
        const C i(0, 1);
        for (std::size_t k = 0; k < k_count; ++k) {
            shift += -i * sensors_[k].frequency * double(n[k] - m[k]) -
                     0.5 * sensors_[k].linewidth * double(n[k] + m[k]);
            if (n[k] > 0) {
                auto lower = n;
                --lower[k];
                source += -i * std::sqrt(double(n[k])) * (left_sigma_ * block(lower, m));
            }
            if (m[k] > 0) {
                auto lower = m;
                --lower[k];
                source += i * std::sqrt(double(m[k])) * (right_sigma_dag_ * block(n, lower));
            }
        }
        Eigen::Matrix4cd a = lsys_ + shift * Eigen::Matrix4cd::Identity();
        x = a.fullPivLu().solve(-source);
    }
    return cache_.emplace(std::move(key), x).first->second;
}

double SensorLimit::moment(const std::vector<int>& orders) {
    if (orders.size() != sensors_.size()) throw std::invalid_argument("orders size mismatch");
    const Eigen::Vector4cd& b = block(orders, orders);
    double f = 1.0;
    for (int a : orders) f *= factorial(a);
    return f * (b(0) + b(3)).real();
}

double SensorLimit::bundle_g() {
    std::vector<int> all;
    for (const auto& s : sensors_) all.push_back(s.bundle_order);
    double den = 1.0;
    for (std::size_t k = 0; k < sensors_.size(); ++k) {
        std::vector<int> single(sensors_.size(), 0);
        single[k] = sensors_[k].bundle_order;
        den *= moment(single);
    }
    return moment(all) / den;
}

double SensorLimit::autocorrelation(int order) {
    if (sensors_.size() != 1) throw std::invalid_argument("autocorrelation needs exactly one sensor");
    return moment({order}) / std::pow(moment({1}), order);
}

}  // namespace mollow::testing
