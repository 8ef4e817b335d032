#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "symmin/errors.hpp"
#include "symmin/linalg.hpp"

namespace symmin {

/// Expression tree for integrand densities F(r, u1..um, g).
/// Variables: r (radius), u1..u9 (components), g (|grad u|).
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  constant, var_r, var_u, var_g,
  add, sub, mul, divide, negate,
  pow_op, pos, neg, min_op, max_op, piecewise
};

struct Expr {
  ExprKind kind;
  double value = 0.0;              // constant value or pow exponent
  int var_index = 0;               // u-variable index (1-based)
  std::vector<ExprPtr> kids;
  std::vector<double> breakpoints;            // piecewise
  std::vector<std::vector<double>> pieces;    // polynomial coefficients, ascending

  static ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::constant;
    e->value = v;
    return e;
  }
  static ExprPtr var(ExprKind k, int idx = 0) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->var_index = idx;
    return e;
  }
  static ExprPtr node(ExprKind k, std::vector<ExprPtr> kids, double v = 0.0) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->kids = std::move(kids);
    e->value = v;
    return e;
  }
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind || a->value != b->value || a->var_index != b->var_index)
    return false;
  if (a->breakpoints != b->breakpoints || a->pieces != b->pieces) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!expr_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

inline std::size_t expr_size(const ExprPtr& e) {
  std::size_t n = 1;
  for (const auto& k : e->kids) n += expr_size(k);
  return n;
}

inline void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case ExprKind::var_r: out.insert("r"); break;
    case ExprKind::var_g: out.insert("g"); break;
    case ExprKind::var_u: out.insert("u" + std::to_string(e->var_index)); break;
    default: break;
  }
  for (const auto& k : e->kids) collect_vars(k, out);
}

inline bool uses_var(const ExprPtr& e, ExprKind k) {
  if (e->kind == k) return true;
  for (const auto& c : e->kids)
    if (uses_var(c, k)) return true;
  return false;
}

inline int max_u_index(const ExprPtr& e) {
  int mx = e->kind == ExprKind::var_u ? e->var_index : 0;
  for (const auto& k : e->kids) mx = std::max(mx, max_u_index(k));
  return mx;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double eval_poly(const std::vector<double>& coef, double x) {
  double v = 0.0;
  for (std::size_t i = coef.size(); i-- > 0;) v = v * x + coef[i];
  return v;
}

inline std::vector<double> poly_derivative(const std::vector<double>& coef) {
  std::vector<double> d;
  for (std::size_t i = 1; i < coef.size(); ++i) d.push_back(coef[i] * (double)i);
  if (d.empty()) d.push_back(0.0);
  return d;
}

/// Index of the active piecewise piece: intervals are left-closed, so a knot
/// uses the piece to its right (the right-derivative convention).
inline std::size_t piece_index(const std::vector<double>& bp, double x) {
  std::size_t i = 0;
  while (i < bp.size() && x >= bp[i]) ++i;
  return i;
}

}  // namespace detail

inline double eval_density(const ExprPtr& e, double r, const Vec& u, double g);

namespace detail {

inline double eval_impl(const Expr& e, double r, const Vec& u, double g) {
  auto kid = [&](int i) { return eval_density(e.kids[i], r, u, g); };
  switch (e.kind) {
    case ExprKind::constant: return e.value;
    case ExprKind::var_r: return r;
    case ExprKind::var_g: return g;
    case ExprKind::var_u:
      if (e.var_index > (int)u.size())
        throw DomainError("component u" + std::to_string(e.var_index) + " not supplied");
      return u[e.var_index - 1];
    case ExprKind::add: return kid(0) + kid(1);
    case ExprKind::sub: return kid(0) - kid(1);
    case ExprKind::mul: return kid(0) * kid(1);
    case ExprKind::divide: {
      double d = kid(1);
      if (d == 0.0) throw DomainError("division by zero");
      return kid(0) / d;
    }
    case ExprKind::negate: return -kid(0);
    case ExprKind::pow_op: {
      double b = kid(0);
      if (b == 0.0 && e.value < 0.0) throw DomainError("pow(0, negative exponent)");
      if (b < 0.0 && e.value != std::round(e.value))
        throw DomainError("pow of negative base with fractional exponent");
      return std::pow(b, e.value);
    }
    case ExprKind::pos: return std::max(kid(0), 0.0);
    case ExprKind::neg: return std::max(-kid(0), 0.0);
    case ExprKind::min_op: return std::min(kid(0), kid(1));
    case ExprKind::max_op: return std::max(kid(0), kid(1));
    case ExprKind::piecewise: {
      double x = kid(0);
      return eval_poly(e.pieces[piece_index(e.breakpoints, x)], x);
    }
  }
  throw DomainError("unreachable expression kind");
}

}  // namespace detail

inline double eval_density(const ExprPtr& e, double r, const Vec& u, double g) {
  return detail::eval_impl(*e, r, u, g);
}

/// Value and partial derivatives of a density at a point. `grad` holds
/// (d/du1 .. d/dum, d/dg); d/dr is not needed by any caller and is omitted.
struct DensityJet {
  double value = 0.0;
  Vec grad;                     // size m + 1, last entry is d/dg
  bool nondifferentiable = false;
};

namespace detail {

inline DensityJet jet_impl(const Expr& e, double r, const Vec& u, double g, int m) {
  auto jet = [&](int i) { return jet_impl(*e.kids[i], r, u, g, m); };
  DensityJet out;
  out.grad.assign(m + 1, 0.0);
  switch (e.kind) {
    case ExprKind::constant: out.value = e.value; return out;
    case ExprKind::var_r: out.value = r; return out;
    case ExprKind::var_g:
      out.value = g;
      out.grad[m] = 1.0;
      return out;
    case ExprKind::var_u:
      out.value = u[e.var_index - 1];
      out.grad[e.var_index - 1] = 1.0;
      return out;
    case ExprKind::add: {
      DensityJet a = jet(0), b = jet(1);
      out.value = a.value + b.value;
      for (int i = 0; i <= m; ++i) out.grad[i] = a.grad[i] + b.grad[i];
      out.nondifferentiable = a.nondifferentiable || b.nondifferentiable;
      return out;
    }
    case ExprKind::sub: {
      DensityJet a = jet(0), b = jet(1);
      out.value = a.value - b.value;
      for (int i = 0; i <= m; ++i) out.grad[i] = a.grad[i] - b.grad[i];
      out.nondifferentiable = a.nondifferentiable || b.nondifferentiable;
      return out;
    }
    case ExprKind::mul: {
      DensityJet a = jet(0), b = jet(1);
      out.value = a.value * b.value;
      for (int i = 0; i <= m; ++i)
        out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
      out.nondifferentiable = a.nondifferentiable || b.nondifferentiable;
      return out;
    }
    case ExprKind::divide: {
      DensityJet a = jet(0), b = jet(1);
      if (b.value == 0.0) throw DomainError("division by zero");
      out.value = a.value / b.value;
      for (int i = 0; i <= m; ++i)
        out.grad[i] = (a.grad[i] - out.value * b.grad[i]) / b.value;
      out.nondifferentiable = a.nondifferentiable || b.nondifferentiable;
      return out;
    }
    case ExprKind::negate: {
      DensityJet a = jet(0);
      out.value = -a.value;
      for (int i = 0; i <= m; ++i) out.grad[i] = -a.grad[i];
      out.nondifferentiable = a.nondifferentiable;
      return out;
    }
    case ExprKind::pow_op: {
      DensityJet a = jet(0);
      double p = e.value;
      if (a.value == 0.0 && p < 1.0 && p != 0.0) {
        // b^p with p in (0,1) has infinite slope at 0; the chain-rule factor
        // is only ever hit with a'(.) = 0 there (guard domain), else flag.
        out.value = 0.0;
        bool zero_grad = true;
        for (int i = 0; i <= m; ++i) zero_grad = zero_grad && a.grad[i] == 0.0;
        out.nondifferentiable = a.nondifferentiable || !zero_grad;
        return out;
      }
      out.value = std::pow(a.value, p);
      double f = (p == 0.0) ? 0.0 : p * std::pow(a.value, p - 1.0);
      for (int i = 0; i <= m; ++i) out.grad[i] = f * a.grad[i];
      out.nondifferentiable = a.nondifferentiable;
      return out;
    }
    case ExprKind::pos: {
      DensityJet a = jet(0);
      // right-derivative convention: slope 1 at the kink
      double f = a.value >= 0.0 ? 1.0 : 0.0;
      out.value = std::max(a.value, 0.0);
      for (int i = 0; i <= m; ++i) out.grad[i] = f * a.grad[i];
      out.nondifferentiable = a.nondifferentiable || (a.value == 0.0);
      return out;
    }
    case ExprKind::neg: {
      DensityJet a = jet(0);
      double f = a.value < 0.0 ? -1.0 : 0.0;
      out.value = std::max(-a.value, 0.0);
      for (int i = 0; i <= m; ++i) out.grad[i] = f * a.grad[i];
      out.nondifferentiable = a.nondifferentiable || (a.value == 0.0);
      return out;
    }
    case ExprKind::min_op: {
      DensityJet a = jet(0), b = jet(1);
      const DensityJet& pick = (a.value < b.value) ? a : b;  // ties: second
      out.value = std::min(a.value, b.value);
      out.grad = pick.grad;
      out.nondifferentiable =
          a.nondifferentiable || b.nondifferentiable || (a.value == b.value);
      return out;
    }
    case ExprKind::max_op: {
      DensityJet a = jet(0), b = jet(1);
      const DensityJet& pick = (a.value > b.value) ? a : b;  // ties: second
      out.value = std::max(a.value, b.value);
      out.grad = pick.grad;
      out.nondifferentiable =
          a.nondifferentiable || b.nondifferentiable || (a.value == b.value);
      return out;
    }
    case ExprKind::piecewise: {
      DensityJet a = jet(0);
      std::size_t i = piece_index(e.breakpoints, a.value);
      out.value = eval_poly(e.pieces[i], a.value);
      double f = eval_poly(poly_derivative(e.pieces[i]), a.value);
      for (int j = 0; j <= m; ++j) out.grad[j] = f * a.grad[j];
      bool on_knot = false;
      for (double b : e.breakpoints) on_knot = on_knot || (a.value == b);
      out.nondifferentiable = a.nondifferentiable || on_knot;
      return out;
    }
  }
  throw DomainError("unreachable expression kind");
}

}  // namespace detail

inline DensityJet eval_partials(const ExprPtr& e, double r, const Vec& u, double g,
                                int m) {
  return detail::jet_impl(*e, r, u, g, m);
}

// ---------------------------------------------------------------------------
// Compiled evaluation
//
// Quadrature and gradient assembly evaluate the same density at every grid
// node on every iteration; walking the shared_ptr tree with a heap-allocated
// jet per node dominates the optimizer's runtime. CompiledDensity flattens
// the tree once into a postfix program evaluated on a fixed-size stack with
// no allocation. The instruction semantics (derivative conventions, guard
// errors, operation order) mirror eval_impl/jet_impl exactly, so compiled
// results are bit-identical to the tree evaluator's.

class CompiledDensity {
 public:
  static constexpr int kMaxStack = 64;
  static constexpr int kMaxComponents = 9;

  CompiledDensity() = default;

  CompiledDensity(const ExprPtr& e, int m) : m_(m), width_(m + 2) {
    if (m > kMaxComponents)
      throw PreconditionError("too many field components to compile a density");
    flatten(*e);
    int depth = 0, peak = 0;
    for (const Instr& op : prog_) {
      depth += 1 - operands(op.kind);
      peak = std::max(peak, depth);
    }
    if (peak > kMaxStack)
      throw PreconditionError("density expression nests too deeply to compile");
  }

  int arity() const { return m_; }
  bool valid() const { return !prog_.empty(); }

  double eval(double r, const double* u, double g) const {
    double stack[kMaxStack];
    int top = 0;  // next free slot
    for (const Instr& op : prog_) {
      switch (op.kind) {
        case ExprKind::constant: stack[top++] = op.value; break;
        case ExprKind::var_r: stack[top++] = r; break;
        case ExprKind::var_g: stack[top++] = g; break;
        case ExprKind::var_u: stack[top++] = u[op.var_index - 1]; break;
        case ExprKind::add: --top; stack[top - 1] += stack[top]; break;
        case ExprKind::sub: --top; stack[top - 1] -= stack[top]; break;
        case ExprKind::mul: --top; stack[top - 1] *= stack[top]; break;
        case ExprKind::divide:
          --top;
          if (stack[top] == 0.0) throw DomainError("division by zero");
          stack[top - 1] /= stack[top];
          break;
        case ExprKind::negate: stack[top - 1] = -stack[top - 1]; break;
        case ExprKind::pow_op: {
          double b = stack[top - 1];
          if (b == 0.0 && op.value < 0.0)
            throw DomainError("pow(0, negative exponent)");
          if (b < 0.0 && op.value != std::round(op.value))
            throw DomainError("pow of negative base with fractional exponent");
          stack[top - 1] = std::pow(b, op.value);
          break;
        }
        case ExprKind::pos: stack[top - 1] = std::max(stack[top - 1], 0.0); break;
        case ExprKind::neg: stack[top - 1] = std::max(-stack[top - 1], 0.0); break;
        case ExprKind::min_op:
          --top;
          stack[top - 1] = std::min(stack[top - 1], stack[top]);
          break;
        case ExprKind::max_op:
          --top;
          stack[top - 1] = std::max(stack[top - 1], stack[top]);
          break;
        case ExprKind::piecewise: {
          double x = stack[top - 1];
          const Piecewise& pw = tables_[op.table];
          stack[top - 1] =
              detail::eval_poly(pw.pieces[detail::piece_index(pw.breakpoints, x)], x);
          break;
        }
      }
    }
    return stack[0];
  }

  /// Value plus the (m+1) partials (d/du1..d/dum, d/dg); r-partials are not
  /// tracked, matching eval_partials. Writes the partials into `partials`.
  double eval_jet(double r, const double* u, double g, double* partials,
                  bool* nondifferentiable) const {
    // slot layout: [value, du1..dum, dg] per stack entry
    double stack[kMaxStack * 11];
    const int w = width_;
    bool nondiff = false;
    int top = 0;
    auto slot = [&](int i) { return stack + (std::size_t)i * w; };
    auto push_leaf = [&](double v) {
      double* s = slot(top++);
      s[0] = v;
      for (int i = 1; i < w; ++i) s[i] = 0.0;
      return s;
    };
    for (const Instr& op : prog_) {
      switch (op.kind) {
        case ExprKind::constant: push_leaf(op.value); break;
        case ExprKind::var_r: push_leaf(r); break;
        case ExprKind::var_g: push_leaf(g)[w - 1] = 1.0; break;
        case ExprKind::var_u:
          push_leaf(u[op.var_index - 1])[op.var_index] = 1.0;
          break;
        case ExprKind::add: {
          double* a = slot(--top - 1);
          double* b = a + w;
          for (int i = 0; i < w; ++i) a[i] += b[i];
          break;
        }
        case ExprKind::sub: {
          double* a = slot(--top - 1);
          double* b = a + w;
          for (int i = 0; i < w; ++i) a[i] -= b[i];
          break;
        }
        case ExprKind::mul: {
          double* a = slot(--top - 1);
          double* b = a + w;
          for (int i = 1; i < w; ++i) a[i] = a[i] * b[0] + a[0] * b[i];
          a[0] *= b[0];
          break;
        }
        case ExprKind::divide: {
          double* a = slot(--top - 1);
          double* b = a + w;
          if (b[0] == 0.0) throw DomainError("division by zero");
          a[0] /= b[0];
          for (int i = 1; i < w; ++i) a[i] = (a[i] - a[0] * b[i]) / b[0];
          break;
        }
        case ExprKind::negate: {
          double* a = slot(top - 1);
          for (int i = 0; i < w; ++i) a[i] = -a[i];
          break;
        }
        case ExprKind::pow_op: {
          double* a = slot(top - 1);
          double p = op.value;
          if (a[0] == 0.0 && p < 1.0 && p != 0.0) {
            bool zero_grad = true;
            for (int i = 1; i < w; ++i) zero_grad = zero_grad && a[i] == 0.0;
            nondiff = nondiff || !zero_grad;
            for (int i = 0; i < w; ++i) a[i] = 0.0;
            break;
          }
          double v = std::pow(a[0], p);
          double f = (p == 0.0) ? 0.0 : p * std::pow(a[0], p - 1.0);
          a[0] = v;
          for (int i = 1; i < w; ++i) a[i] *= f;
          break;
        }
        case ExprKind::pos: {
          double* a = slot(top - 1);
          double f = a[0] >= 0.0 ? 1.0 : 0.0;
          nondiff = nondiff || (a[0] == 0.0);
          a[0] = std::max(a[0], 0.0);
          for (int i = 1; i < w; ++i) a[i] *= f;
          break;
        }
        case ExprKind::neg: {
          double* a = slot(top - 1);
          double f = a[0] < 0.0 ? -1.0 : 0.0;
          nondiff = nondiff || (a[0] == 0.0);
          a[0] = std::max(-a[0], 0.0);
          for (int i = 1; i < w; ++i) a[i] *= f;
          break;
        }
        case ExprKind::min_op: {
          double* a = slot(--top - 1);
          double* b = a + w;
          nondiff = nondiff || (a[0] == b[0]);
          if (!(a[0] < b[0]))  // ties pick the second operand
            for (int i = 0; i < w; ++i) a[i] = b[i];
          break;
        }
        case ExprKind::max_op: {
          double* a = slot(--top - 1);
          double* b = a + w;
          nondiff = nondiff || (a[0] == b[0]);
          if (!(a[0] > b[0]))
            for (int i = 0; i < w; ++i) a[i] = b[i];
          break;
        }
        case ExprKind::piecewise: {
          double* a = slot(top - 1);
          const Piecewise& pw = tables_[op.table];
          std::size_t pi = detail::piece_index(pw.breakpoints, a[0]);
          double f = detail::eval_poly(pw.derivatives[pi], a[0]);
          for (double bp : pw.breakpoints) nondiff = nondiff || (a[0] == bp);
          a[0] = detail::eval_poly(pw.pieces[pi], a[0]);
          for (int i = 1; i < w; ++i) a[i] *= f;
          break;
        }
      }
    }
    for (int i = 0; i < w - 1; ++i) partials[i] = stack[i + 1];
    if (nondifferentiable) *nondifferentiable = nondiff;
    return stack[0];
  }

 private:
  struct Instr {
    ExprKind kind;
    double value = 0.0;  // constant or pow exponent
    int var_index = 0;
    int table = 0;       // piecewise table index
  };
  struct Piecewise {
    std::vector<double> breakpoints;
    std::vector<std::vector<double>> pieces;
    std::vector<std::vector<double>> derivatives;
  };

  static int operands(ExprKind k) {
    switch (k) {
      case ExprKind::constant:
      case ExprKind::var_r:
      case ExprKind::var_u:
      case ExprKind::var_g: return 0;
      case ExprKind::negate:
      case ExprKind::pow_op:
      case ExprKind::pos:
      case ExprKind::neg:
      case ExprKind::piecewise: return 1;
      default: return 2;
    }
  }

  void flatten(const Expr& e) {
    for (const auto& kid : e.kids) flatten(*kid);
    Instr op;
    op.kind = e.kind;
    op.value = e.value;
    op.var_index = e.var_index;
    if (e.kind == ExprKind::var_u && e.var_index > m_)
      throw DomainError("component u" + std::to_string(e.var_index) +
                        " not supplied");
    if (e.kind == ExprKind::piecewise) {
      Piecewise pw;
      pw.breakpoints = e.breakpoints;
      pw.pieces = e.pieces;
      for (const auto& piece : e.pieces)
        pw.derivatives.push_back(detail::poly_derivative(piece));
      op.table = (int)tables_.size();
      tables_.push_back(std::move(pw));
    }
    prog_.push_back(op);
  }

  std::vector<Instr> prog_;
  std::vector<Piecewise> tables_;
  int m_ = 0;
  int width_ = 2;  // value + m partials + g partial
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int arity;  // declared component count

  explicit Parser(const std::string& t, int m) : text(t), arity(m) {}

  [[noreturn]] void fail(const std::string& expected) {
    throw SyntaxError("at position " + std::to_string(pos) + ": expected " + expected);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("'") + c + "'");
  }

  bool peek_ident(std::string& out) {
    skip_ws();
    std::size_t p = pos;
    std::string s;
    while (p < text.size() &&
           (std::isalnum((unsigned char)text[p]) || text[p] == '_')) {
      s += text[p];
      ++p;
    }
    if (s.empty()) return false;
    out = s;
    return true;
  }

  std::string take_ident() {
    std::string s;
    if (!peek_ident(s)) fail("identifier");
    pos += s.size();
    return s;
  }

  double number() {
    skip_ws();
    std::size_t start = pos;
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("number");
    pos = start + (std::size_t)(end - begin);
    return v;
  }

  double signed_number() {
    skip_ws();
    bool negate = consume('-');
    double v = number();
    return negate ? -v : v;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (consume('+'))
        lhs = Expr::node(ExprKind::add, {lhs, term()});
      else if (consume('-'))
        lhs = Expr::node(ExprKind::sub, {lhs, term()});
      else
        return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      if (consume('*'))
        lhs = Expr::node(ExprKind::mul, {lhs, unary()});
      else if (consume('/'))
        lhs = Expr::node(ExprKind::divide, {lhs, unary()});
      else
        return lhs;
    }
  }

  ExprPtr unary() {
    if (consume('-')) {
      skip_ws();
      // fold a negated literal into a constant so trees round-trip
      if (pos < text.size() &&
          (std::isdigit((unsigned char)text[pos]) || text[pos] == '.'))
        return Expr::constant(-number());
      return Expr::node(ExprKind::negate, {unary()});
    }
    return primary();
  }

  ExprPtr primary() {
    skip_ws();
    if (pos >= text.size()) fail("expression");
    char c = text[pos];
    if (std::isdigit((unsigned char)c) || c == '.') return Expr::constant(number());
    if (c == '(') {
      ++pos;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    std::string id = take_ident();
    if (id == "r") return Expr::var(ExprKind::var_r);
    if (id == "g") return Expr::var(ExprKind::var_g);
    if (id.size() == 2 && id[0] == 'u' && id[1] >= '1' && id[1] <= '9') {
      int idx = id[1] - '0';
      if (idx > arity)
        throw UnknownVariable("u" + std::to_string(idx) + " used but only " +
                              std::to_string(arity) + " components declared (position " +
                              std::to_string(pos) + ")");
      return Expr::var(ExprKind::var_u, idx);
    }
    if (id == "pow") return parse_pow();
    if (id == "pos" || id == "neg") {
      expect('(');
      ExprPtr a = expr();
      expect(')');
      return Expr::node(id == "pos" ? ExprKind::pos : ExprKind::neg, {a});
    }
    if (id == "min" || id == "max") {
      expect('(');
      ExprPtr a = expr();
      expect(',');
      ExprPtr b = expr();
      expect(')');
      return Expr::node(id == "min" ? ExprKind::min_op : ExprKind::max_op, {a, b});
    }
    if (id == "piecewise") return parse_piecewise();
    fail("variable or function name (got '" + id + "')");
  }

  ExprPtr parse_pow() {
    expect('(');
    ExprPtr base = expr();
    expect(',');
    double exponent = signed_number();
    expect(')');
    if (exponent != std::round(exponent) && base->kind != ExprKind::pos)
      throw GuardError("fractional pow requires a pos(...) argument");
    return Expr::node(ExprKind::pow_op, {base}, exponent);
  }

  ExprPtr parse_piecewise() {
    expect('(');
    ExprPtr arg = expr();
    auto node = std::make_shared<Expr>();
    node->kind = ExprKind::piecewise;
    node->kids.push_back(arg);
    // numbers are breakpoints; poly(...) calls are the pieces
    for (;;) {
      expect(',');
      skip_ws();
      std::string id;
      if (peek_ident(id) && id == "poly") break;
      node->breakpoints.push_back(signed_number());
    }
    for (;;) {
      std::string id = take_ident();
      if (id != "poly") fail("'poly'");
      expect('(');
      std::vector<double> coef;
      coef.push_back(signed_number());
      while (consume(',')) coef.push_back(signed_number());
      expect(')');
      node->pieces.push_back(std::move(coef));
      if (!consume(',')) break;
    }
    expect(')');
    if (node->breakpoints.empty())
      throw ArityError("piecewise needs at least one breakpoint");
    for (std::size_t i = 1; i < node->breakpoints.size(); ++i)
      if (!(node->breakpoints[i - 1] < node->breakpoints[i]))
        throw ArityError("piecewise breakpoints must be strictly increasing");
    if (node->pieces.size() != node->breakpoints.size() + 1)
      throw ArityError("piecewise needs (breakpoints + 1) poly pieces, got " +
                       std::to_string(node->pieces.size()));
    return node;
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::add:
    case ExprKind::sub: return 1;
    case ExprKind::mul:
    case ExprKind::divide: return 2;
    case ExprKind::negate: return 3;
    default: return 4;
  }
}

inline void print_impl(const Expr& e, std::string& out, int parent_prec,
                       bool right_operand) {
  int prec = precedence(e.kind);
  bool need_paren =
      prec < parent_prec ||
      (prec == parent_prec && right_operand && prec > 0 && prec < 4);
  if (need_paren) out += '(';
  auto binary = [&](const char* op) {
    print_impl(*e.kids[0], out, prec, false);
    out += op;
    print_impl(*e.kids[1], out, prec, true);
  };
  switch (e.kind) {
    case ExprKind::constant: {
      if (e.value < 0.0) {
        out += "(" + format_double(e.value) + ")";
      } else {
        out += format_double(e.value);
      }
      break;
    }
    case ExprKind::var_r: out += 'r'; break;
    case ExprKind::var_g: out += 'g'; break;
    case ExprKind::var_u: out += "u" + std::to_string(e.var_index); break;
    case ExprKind::add: binary(" + "); break;
    case ExprKind::sub: binary(" - "); break;
    case ExprKind::mul: binary("*"); break;
    case ExprKind::divide: binary("/"); break;
    case ExprKind::negate:
      out += '-';
      // parenthesize a literal operand: "-c" would re-parse as a negative
      // constant rather than a negation node
      if (e.kids[0]->kind == ExprKind::constant && e.kids[0]->value >= 0.0) {
        out += '(';
        print_impl(*e.kids[0], out, 0, false);
        out += ')';
      } else {
        print_impl(*e.kids[0], out, prec, true);
      }
      break;
    case ExprKind::pow_op:
      out += "pow(";
      print_impl(*e.kids[0], out, 0, false);
      out += ", " + format_double(e.value) + ")";
      break;
    case ExprKind::pos:
    case ExprKind::neg:
      out += e.kind == ExprKind::pos ? "pos(" : "neg(";
      print_impl(*e.kids[0], out, 0, false);
      out += ')';
      break;
    case ExprKind::min_op:
    case ExprKind::max_op:
      out += e.kind == ExprKind::min_op ? "min(" : "max(";
      print_impl(*e.kids[0], out, 0, false);
      out += ", ";
      print_impl(*e.kids[1], out, 0, false);
      out += ')';
      break;
    case ExprKind::piecewise: {
      out += "piecewise(";
      print_impl(*e.kids[0], out, 0, false);
      for (double b : e.breakpoints) out += ", " + format_double(b);
      for (const auto& piece : e.pieces) {
        out += ", poly(";
        for (std::size_t i = 0; i < piece.size(); ++i) {
          if (i) out += ", ";
          out += format_double(piece[i]);
        }
        out += ')';
      }
      out += ')';
      break;
    }
  }
  if (need_paren) out += ')';
}

}  // namespace detail

inline ExprPtr parse_density(const std::string& text, int arity = 9) {
  if (text.size() > 64 * 1024) throw SyntaxError("density text exceeds 64 KiB");
  detail::Parser p(text, arity);
  ExprPtr e = p.expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw SyntaxError("at position " + std::to_string(p.pos) + ": trailing input");
  return e;
}

inline std::string pretty_print(const ExprPtr& e) {
  std::string out;
  detail::print_impl(*e, out, 0, false);
  return out;
}

/// A problem's densities: the energy integrand F plus constraint integrands
/// G_j with targets lambda_j.
struct DensitySet {
  ExprPtr F;
  std::vector<ExprPtr> G;
  Vec lambda;

  int k() const { return (int)G.size(); }
};

}  // namespace symmin
