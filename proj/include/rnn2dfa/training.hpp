#pragma once
// Gradient training for the recurrent acceptors: log-loss on the final
// logit, full backpropagation through time written out gate by gate, Adam
// updates, and batches grouped by word length so every forward pass is a
// handful of dense products.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "corpus.hpp"
#include "rnn.hpp"

namespace rnn2dfa {

namespace detail {

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

struct GruTrace {
  Eigen::MatrixXd input, h_prev, m;
  Eigen::ArrayXXd z, r, n;
};
struct LstmTrace {
  Eigen::MatrixXd input, h_prev;
  Eigen::ArrayXXd c_prev, i, f, o, g, c;
};

}  // namespace detail

// Mean log-loss of the labelled words under the network, with parameter
// gradients (aligned with net.params()) accumulated into *grads when given.
inline double rnn_loss_and_grad(const RnnAcceptor& net,
                                const std::vector<Word>& words,
                                const std::vector<bool>& labels,
                                std::vector<Eigen::MatrixXd>* grads) {
  if (words.size() != labels.size() || words.empty())
    throw std::invalid_argument("rnn_loss_and_grad: bad batch");
  const RnnConfig& cfg = net.config();
  const auto& P = net.params();
  const int H = cfg.hidden;
  const int per = net.params_per_layer();
  const bool is_gru = cfg.cell == CellKind::gru;
  if (grads) {
    grads->clear();
    for (const auto& p : P)
      grads->push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  }
  auto pm = [&](int l, int idx) -> const Eigen::MatrixXd& {
    return P[l * per + idx];
  };

  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < words.size(); ++i)
    by_length[words[i].size()].push_back(i);

  double loss_sum = 0;
  for (const auto& [len, idx] : by_length) {
    const int B = static_cast<int>(idx.size());
    const int T = static_cast<int>(len);
    // Forward, keeping everything the backward sweep needs.
    std::vector<std::vector<detail::GruTrace>> gtr;
    std::vector<std::vector<detail::LstmTrace>> ltr;
    if (is_gru)
      gtr.assign(cfg.layers, std::vector<detail::GruTrace>(T));
    else
      ltr.assign(cfg.layers, std::vector<detail::LstmTrace>(T));
    std::vector<Eigen::MatrixXd> h(cfg.layers, Eigen::MatrixXd::Zero(H, B));
    std::vector<Eigen::MatrixXd> c(cfg.layers, Eigen::MatrixXd::Zero(H, B));
    for (int t = 0; t < T; ++t) {
      Eigen::MatrixXd input = Eigen::MatrixXd::Zero(cfg.alphabet_size, B);
      for (int b = 0; b < B; ++b) input(words[idx[b]][t], b) = 1.0;
      for (int l = 0; l < cfg.layers; ++l) {
        auto affine = [&](int g, const Eigen::MatrixXd& in,
                          const Eigen::MatrixXd& hh) -> Eigen::ArrayXXd {
          return ((pm(l, g) * in + pm(l, g + 1) * hh).colwise() +
                  pm(l, g + 2).col(0))
              .array();
        };
        if (is_gru) {
          detail::GruTrace& tr = gtr[l][t];
          tr.input = input;
          tr.h_prev = h[l];
          tr.z = detail::sigmoid(affine(0, input, h[l]));
          tr.r = detail::sigmoid(affine(3, input, h[l]));
          tr.m = (tr.r * h[l].array()).matrix();
          tr.n = affine(6, input, tr.m).tanh();
          h[l] = (tr.z * h[l].array() + (1.0 - tr.z) * tr.n).matrix();
        } else {
          detail::LstmTrace& tr = ltr[l][t];
          tr.input = input;
          tr.h_prev = h[l];
          tr.c_prev = c[l].array();
          tr.i = detail::sigmoid(affine(0, input, h[l]));
          tr.f = detail::sigmoid(affine(3, input, h[l]));
          tr.o = detail::sigmoid(affine(6, input, h[l]));
          tr.g = affine(9, input, h[l]).tanh();
          c[l] = (tr.f * c[l].array() + tr.i * tr.g).matrix();
          tr.c = c[l].array();
          h[l] = (tr.o * tr.c.tanh()).matrix();
        }
        input = h[l];
      }
    }
    const Eigen::MatrixXd& w = P[P.size() - 2];
    const double bias = P.back()(0, 0);
    Eigen::RowVectorXd logits = w.col(0).transpose() * h[cfg.layers - 1];
    Eigen::RowVectorXd dlogit(B);
    for (int b = 0; b < B; ++b) {
      double y = labels[idx[b]] ? 1.0 : -1.0;
      double lg = logits(b) + bias;
      loss_sum += detail::softplus(-y * lg);
      dlogit(b) = -y / (1.0 + std::exp(y * lg));
    }
    if (!grads) continue;
    auto& G = *grads;
    G[P.size() - 2].col(0) += h[cfg.layers - 1] * dlogit.transpose();
    G.back()(0, 0) += dlogit.sum();
    std::vector<Eigen::MatrixXd> dh(cfg.layers, Eigen::MatrixXd::Zero(H, B));
    std::vector<Eigen::MatrixXd> dc(cfg.layers, Eigen::MatrixXd::Zero(H, B));
    dh[cfg.layers - 1] = w.col(0) * dlogit;
    for (int t = T - 1; t >= 0; --t) {
      for (int l = cfg.layers - 1; l >= 0; --l) {
        auto add = [&](int g, const Eigen::MatrixXd& da,
                       const Eigen::MatrixXd& in,
                       const Eigen::MatrixXd& hh) {
          G[l * per + g] += da * in.transpose();
          G[l * per + g + 1] += da * hh.transpose();
          G[l * per + g + 2].col(0) += da.rowwise().sum();
        };
        Eigen::MatrixXd dinput;
        if (is_gru) {
          const detail::GruTrace& tr = gtr[l][t];
          Eigen::ArrayXXd dH = dh[l].array();
          Eigen::ArrayXXd dz = dH * (tr.h_prev.array() - tr.n);
          Eigen::MatrixXd daz = (dz * tr.z * (1.0 - tr.z)).matrix();
          Eigen::ArrayXXd dn = dH * (1.0 - tr.z);
          Eigen::MatrixXd dan = (dn * (1.0 - tr.n.square())).matrix();
          Eigen::ArrayXXd dm = (pm(l, 7).transpose() * dan).array();
          Eigen::ArrayXXd dr = dm * tr.h_prev.array();
          Eigen::MatrixXd dar = (dr * tr.r * (1.0 - tr.r)).matrix();
          dh[l] = (dH * tr.z + dm * tr.r).matrix() +
                  pm(l, 1).transpose() * daz + pm(l, 4).transpose() * dar;
          dinput = pm(l, 0).transpose() * daz + pm(l, 3).transpose() * dar +
                   pm(l, 6).transpose() * dan;
          add(0, daz, tr.input, tr.h_prev);
          add(3, dar, tr.input, tr.h_prev);
          add(6, dan, tr.input, tr.m);
        } else {
          const detail::LstmTrace& tr = ltr[l][t];
          Eigen::ArrayXXd tc = tr.c.tanh();
          Eigen::ArrayXXd dH = dh[l].array();
          Eigen::MatrixXd dao = (dH * tc * tr.o * (1.0 - tr.o)).matrix();
          Eigen::ArrayXXd dcc = dc[l].array() + dH * tr.o * (1.0 - tc.square());
          Eigen::MatrixXd dai = (dcc * tr.g * tr.i * (1.0 - tr.i)).matrix();
          Eigen::MatrixXd daf =
              (dcc * tr.c_prev * tr.f * (1.0 - tr.f)).matrix();
          Eigen::MatrixXd dag =
              (dcc * tr.i * (1.0 - tr.g.square())).matrix();
          dc[l] = (dcc * tr.f).matrix();
          dh[l] = pm(l, 1).transpose() * dai + pm(l, 4).transpose() * daf +
                  pm(l, 7).transpose() * dao + pm(l, 10).transpose() * dag;
          dinput = pm(l, 0).transpose() * dai + pm(l, 3).transpose() * daf +
                   pm(l, 6).transpose() * dao + pm(l, 9).transpose() * dag;
          add(0, dai, tr.input, tr.h_prev);
          add(3, daf, tr.input, tr.h_prev);
          add(6, dao, tr.input, tr.h_prev);
          add(9, dag, tr.input, tr.h_prev);
        }
        if (l > 0) dh[l - 1] += dinput;
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(words.size());
  if (grads)
    for (auto& g : *grads) g *= scale;
  return loss_sum * scale;
}

struct TrainOptions {
  int max_epochs = 500;
  double lr = 0.01;
  double target_loss = 0.005;  // stop once perfect and at most this loss
  std::uint64_t seed = 0;
};

struct TrainReport {
  int epochs = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  bool reached_target = false;
};

inline TrainReport train_rnn(RnnAcceptor& net, const Dataset& ds,
                             const TrainOptions& opts = {}) {
  if (ds.samples.empty())
    throw std::invalid_argument("train_rnn: empty dataset");
  std::map<std::size_t, std::pair<std::vector<Word>, std::vector<bool>>>
      grouped;
  std::vector<Word> all_words;
  std::vector<bool> all_labels;
  for (const auto& [w, label] : ds.samples) {
    auto& g = grouped[w.size()];
    g.first.push_back(w);
    g.second.push_back(label);
    all_words.push_back(w);
    all_labels.push_back(label);
  }
  std::vector<std::size_t> group_order;
  std::vector<const std::pair<std::vector<Word>, std::vector<bool>>*> groups;
  for (const auto& [len, g] : grouped) {
    group_order.push_back(groups.size());
    groups.push_back(&g);
  }

  auto& P = net.params();
  std::vector<Eigen::MatrixXd> m, v;
  for (const auto& p : P) {
    m.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    v.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  }
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long long step = 0;
  std::mt19937_64 rng(opts.seed);

  TrainReport report;
  std::vector<Eigen::MatrixXd> grads;
  const double total = static_cast<double>(ds.samples.size());
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    std::shuffle(group_order.begin(), group_order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t gi : group_order) {
      const auto& [ws, ls] = *groups[gi];
      double loss = rnn_loss_and_grad(net, ws, ls, &grads);
      epoch_loss += loss * static_cast<double>(ws.size());
      ++step;
      double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t p = 0; p < P.size(); ++p) {
        m[p] = b1 * m[p] + (1.0 - b1) * grads[p];
        v[p] = b2 * v[p] + (1.0 - b2) * grads[p].array().square().matrix();
        P[p].array() -= opts.lr * (m[p].array() / c1) /
                        ((v[p].array() / c2).sqrt() + eps);
      }
    }
    report.epochs = epoch + 1;
    report.loss = epoch_loss / total;
    auto verdicts = net.accepts_batch(all_words);
    int correct = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i)
      correct += verdicts[i] == all_labels[i];
    report.accuracy = correct / total;
    if (report.accuracy == 1.0 && report.loss <= opts.target_loss) {
      report.reached_target = true;
      break;
    }
  }
  return report;
}

}  // namespace rnn2dfa
