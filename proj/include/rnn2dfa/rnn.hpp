#pragma once
// Recurrent acceptors over words: stacked gated cells in double precision,
// a linear read-out on the top layer's final hidden vector, and the whole
// per-word state exposed as one flat vector so callers can treat the
// network as a black-box transition system. Inference is batched by word
// length so equivalence sampling stays cheap.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "automata.hpp"

namespace rnn2dfa {

enum class CellKind { gru, lstm };

struct RnnConfig {
  CellKind cell = CellKind::gru;
  int alphabet_size = 2;
  int hidden = 50;
  int layers = 2;
  std::uint64_t seed = 0;
};

namespace detail {
inline const char* const kGruParams[9] = {"Wz", "Uz", "bz", "Wr", "Ur",
                                          "br", "Wn", "Un", "bn"};
inline const char* const kLstmParams[12] = {"Wi", "Ui", "bi", "Wf", "Uf",
                                            "bf", "Wo", "Uo", "bo", "Wg",
                                            "Ug", "bg"};
inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) {
  return 1.0 / (1.0 + (-x).exp());
}
}  // namespace detail

class RnnAcceptor {
 public:
  explicit RnnAcceptor(const RnnConfig& cfg) : cfg_(cfg) {
    if (cfg.alphabet_size < 1 || cfg.hidden < 1 || cfg.layers < 1)
      throw std::invalid_argument("RnnAcceptor: bad configuration");
    std::mt19937_64 rng(cfg.seed);
    double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto fill = [&](Eigen::MatrixXd& m) {
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
    };
    for (int l = 0; l < cfg.layers; ++l) {
      int in_dim = l == 0 ? cfg.alphabet_size : cfg.hidden;
      for (int g = 0; g < gates(); ++g) {
        params_.emplace_back(cfg.hidden, in_dim);
        fill(params_.back());
        params_.emplace_back(cfg.hidden, cfg.hidden);
        fill(params_.back());
        params_.emplace_back(Eigen::MatrixXd::Zero(cfg.hidden, 1));
        // An open forget gate at the start makes the memory cell usable
        // from the first updates.
        if (cfg.cell == CellKind::lstm && g == 1)
          params_.back().setConstant(1.0);
      }
    }
    params_.emplace_back(cfg.hidden, 1);
    fill(params_.back());
    params_.emplace_back(Eigen::MatrixXd::Zero(1, 1));
  }

  const RnnConfig& config() const { return cfg_; }
  int state_dim() const {
    return (cfg_.cell == CellKind::gru ? 1 : 2) * cfg_.layers * cfg_.hidden;
  }
  std::vector<double> initial_state() const {
    return std::vector<double>(state_dim(), 0.0);
  }

  std::vector<double> step(const std::vector<double>& state, Symbol a) const {
    check_state(state);
    if (a < 0 || a >= cfg_.alphabet_size)
      throw std::out_of_range("RnnAcceptor::step: symbol out of range");
    const int H = cfg_.hidden;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg_.alphabet_size);
    x(a) = 1.0;
    std::vector<double> out(state.size());
    for (int l = 0; l < cfg_.layers; ++l) {
      auto affine = [&](int idx, const Eigen::VectorXd& input,
                        const Eigen::VectorXd& h) -> Eigen::ArrayXd {
        return (pm(l, idx) * input + pm(l, idx + 1) * h + pm(l, idx + 2))
            .array();
      };
      if (cfg_.cell == CellKind::gru) {
        Eigen::Map<const Eigen::VectorXd> h(state.data() + l * H, H);
        Eigen::ArrayXd z = sig(affine(0, x, h));
        Eigen::ArrayXd r = sig(affine(3, x, h));
        Eigen::VectorXd m = (r * h.array()).matrix();
        Eigen::ArrayXd n = affine(6, x, m).tanh();
        Eigen::VectorXd hn = (z * h.array() + (1.0 - z) * n).matrix();
        Eigen::Map<Eigen::VectorXd>(out.data() + l * H, H) = hn;
        x = hn;
      } else {
        Eigen::Map<const Eigen::VectorXd> h(state.data() + 2 * l * H, H);
        Eigen::Map<const Eigen::VectorXd> c(state.data() + 2 * l * H + H, H);
        Eigen::ArrayXd i = sig(affine(0, x, h));
        Eigen::ArrayXd f = sig(affine(3, x, h));
        Eigen::ArrayXd o = sig(affine(6, x, h));
        Eigen::ArrayXd g = affine(9, x, h).tanh();
        Eigen::ArrayXd cn = f * c.array() + i * g;
        Eigen::VectorXd hn = (o * cn.tanh()).matrix();
        Eigen::Map<Eigen::VectorXd>(out.data() + 2 * l * H, H) = hn;
        Eigen::Map<Eigen::VectorXd>(out.data() + 2 * l * H + H, H) =
            cn.matrix();
        x = hn;
      }
    }
    return out;
  }

  std::vector<double> state_after(const Word& w) const {
    std::vector<double> s = initial_state();
    for (Symbol a : w) s = step(s, a);
    return s;
  }

  double state_logit(const std::vector<double>& state) const {
    check_state(state);
    const int H = cfg_.hidden;
    int top = cfg_.cell == CellKind::gru ? (cfg_.layers - 1) * H
                                         : 2 * (cfg_.layers - 1) * H;
    Eigen::Map<const Eigen::VectorXd> h(state.data() + top, H);
    return params_[params_.size() - 2].col(0).dot(h) + params_.back()(0, 0);
  }
  bool accepts_state(const std::vector<double>& state) const {
    return state_logit(state) >= 0.0;
  }
  bool accepts(const Word& w) const { return state_logit(state_after(w)) >= 0.0; }

  std::vector<double> logits_batch(const std::vector<Word>& words) const {
    std::map<std::size_t, std::vector<std::size_t>> by_length;
    for (std::size_t i = 0; i < words.size(); ++i)
      by_length[words[i].size()].push_back(i);
    std::vector<double> logits(words.size());
    const int H = cfg_.hidden;
    for (const auto& [len, idx] : by_length) {
      const int B = static_cast<int>(idx.size());
      std::vector<Eigen::MatrixXd> h(cfg_.layers,
                                     Eigen::MatrixXd::Zero(H, B));
      std::vector<Eigen::MatrixXd> c;
      if (cfg_.cell == CellKind::lstm)
        c.assign(cfg_.layers, Eigen::MatrixXd::Zero(H, B));
      for (std::size_t t = 0; t < len; ++t) {
        Eigen::MatrixXd input =
            Eigen::MatrixXd::Zero(cfg_.alphabet_size, B);
        for (int b = 0; b < B; ++b) {
          Symbol a = words[idx[b]][t];
          if (a < 0 || a >= cfg_.alphabet_size)
            throw std::out_of_range("logits_batch: symbol out of range");
          input(a, b) = 1.0;
        }
        for (int l = 0; l < cfg_.layers; ++l) {
          auto affine = [&](int g, const Eigen::MatrixXd& in,
                            const Eigen::MatrixXd& hh) -> Eigen::ArrayXXd {
            return ((pm(l, g) * in + pm(l, g + 1) * hh).colwise() +
                    pm(l, g + 2).col(0))
                .array();
          };
          if (cfg_.cell == CellKind::gru) {
            Eigen::ArrayXXd z = detail::sigmoid(affine(0, input, h[l]));
            Eigen::ArrayXXd r = detail::sigmoid(affine(3, input, h[l]));
            Eigen::MatrixXd m = (r * h[l].array()).matrix();
            Eigen::ArrayXXd n = affine(6, input, m).tanh();
            h[l] = (z * h[l].array() + (1.0 - z) * n).matrix();
          } else {
            Eigen::ArrayXXd i = detail::sigmoid(affine(0, input, h[l]));
            Eigen::ArrayXXd f = detail::sigmoid(affine(3, input, h[l]));
            Eigen::ArrayXXd o = detail::sigmoid(affine(6, input, h[l]));
            Eigen::ArrayXXd g = affine(9, input, h[l]).tanh();
            c[l] = (f * c[l].array() + i * g).matrix();
            h[l] = (o * c[l].array().tanh()).matrix();
          }
          input = h[l];
        }
      }
      Eigen::RowVectorXd out =
          params_[params_.size() - 2].col(0).transpose() * h[cfg_.layers - 1];
      for (int b = 0; b < B; ++b)
        logits[idx[b]] = out(b) + params_.back()(0, 0);
    }
    return logits;
  }

  std::vector<bool> accepts_batch(const std::vector<Word>& words) const {
    std::vector<double> lg = logits_batch(words);
    std::vector<bool> out(lg.size());
    for (std::size_t i = 0; i < lg.size(); ++i) out[i] = lg[i] >= 0.0;
    return out;
  }

  std::vector<Eigen::MatrixXd>& params() { return params_; }
  const std::vector<Eigen::MatrixXd>& params() const { return params_; }
  int params_per_layer() const { return 3 * gates(); }

  json to_json() const {
    json j;
    j["cell"] = cfg_.cell == CellKind::gru ? "gru" : "lstm";
    j["alphabet_size"] = cfg_.alphabet_size;
    j["hidden"] = cfg_.hidden;
    j["layers"] = cfg_.layers;
    j["seed"] = cfg_.seed;
    json p = json::object();
    for (std::size_t i = 0; i < params_.size(); ++i)
      p[param_name(static_cast<int>(i))] = matrix_to_json(params_[i]);
    j["params"] = std::move(p);
    return j;
  }

  static RnnAcceptor from_json(const json& j) {
    try {
      RnnConfig cfg;
      std::string cell = j.at("cell").get<std::string>();
      if (cell == "gru")
        cfg.cell = CellKind::gru;
      else if (cell == "lstm")
        cfg.cell = CellKind::lstm;
      else
        throw std::invalid_argument("unknown cell kind: " + cell);
      cfg.alphabet_size = j.at("alphabet_size").get<int>();
      cfg.hidden = j.at("hidden").get<int>();
      cfg.layers = j.at("layers").get<int>();
      cfg.seed = j.at("seed").get<std::uint64_t>();
      RnnAcceptor net(cfg);
      const json& p = j.at("params");
      for (std::size_t i = 0; i < net.params_.size(); ++i) {
        const std::string name = net.param_name(static_cast<int>(i));
        matrix_from_json(p.at(name), net.params_[i]);
      }
      return net;
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad network document: ") +
                                  e.what());
    }
  }

 private:
  int gates() const { return cfg_.cell == CellKind::gru ? 3 : 4; }
  const Eigen::MatrixXd& pm(int layer, int idx) const {
    return params_[layer * params_per_layer() + idx];
  }
  static Eigen::ArrayXd sig(const Eigen::ArrayXd& x) {
    return 1.0 / (1.0 + (-x).exp());
  }
  void check_state(const std::vector<double>& state) const {
    if (static_cast<int>(state.size()) != state_dim())
      throw std::invalid_argument("state vector has the wrong size");
  }
  std::string param_name(int i) const {
    int per = params_per_layer();
    if (i < cfg_.layers * per) {
      const char* const* names = cfg_.cell == CellKind::gru
                                     ? detail::kGruParams
                                     : detail::kLstmParams;
      return "layer" + std::to_string(i / per) + "." + names[i % per];
    }
    return i == cfg_.layers * per ? "classifier.w" : "classifier.b";
  }
  static json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  }
  static void matrix_from_json(const json& rows, Eigen::MatrixXd& m) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != m.rows())
      throw std::invalid_argument("weight matrix has the wrong row count");
    for (int r = 0; r < m.rows(); ++r) {
      const json& row = rows[r];
      if (!row.is_array() || static_cast<int>(row.size()) != m.cols())
        throw std::invalid_argument("weight matrix has the wrong row width");
      for (int c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
    }
  }

  RnnConfig cfg_;
  std::vector<Eigen::MatrixXd> params_;
};

}  // namespace rnn2dfa
