#include "lipp/miqp.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

// LP-format text interchange: linear constraint rows plus a bracketed
// quadratic objective section ([ ... ] / 2, so squared terms carry doubled
// coefficients). Structured "\ meta" comments carry the instance constants
// that the validator needs.

namespace lipp {

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class TermWriter {
public:
    TermWriter(std::ostream &out, std::size_t per_line) : out_(out), per_line_(per_line) {}

    void term(double coef, std::string const &body)
    {
        out_ << (coef < 0 ? " - " : " + ") << num(std::abs(coef));
        if (!body.empty())
            out_ << ' ' << body;
        if (++count_ % per_line_ == 0)
            out_ << "\n ";
    }

private:
    std::ostream &out_;
    std::size_t per_line_;
    std::size_t count_ = 0;
};

}  // namespace

void exportModel(MiqpModel const &model, std::ostream &out)
{
    out << "\\ lipp miqp model\n";
    out << "\\ meta n " << model.n << "\n";
    out << "\\ meta m " << model.m << "\n";
    out << "\\ meta s_max " << model.s_max << "\n";
    out << "\\ meta start " << model.start << "\n";
    out << "\\ meta target " << model.target << "\n";
    out << "\\ meta lambda " << num(model.lambda) << "\n";
    out << "\\ meta base_mass " << num(model.base_mass) << "\n";
    out << "\\ meta l_max " << num(model.l_max) << "\n";
    out << "\\ meta r_max " << num(model.r_max) << "\n";
    out << "\\ meta budget " << num(model.budget) << "\n";
    if (model.distance_cap)
        out << "\\ meta distance_cap " << num(*model.distance_cap) << "\n";
    out << "\\ meta a_max " << num(model.a_max) << "\n";
    out << "\\ meta big_m_order " << num(model.big_m_order) << "\n";
    out << "\\ meta big_m_load " << num(model.big_m_load) << "\n";
    out << "\\ meta noise_variance " << num(model.noise_variance) << "\n";

    out << "Minimize\n obj:";
    {
        TermWriter w(out, 6);
        for (auto const &[i, coef] : model.objective.linear)
            w.term(coef, model.vars[i].name);
        if (model.objective.constant != 0.0)
            w.term(model.objective.constant, "");
    }
    if (!model.objective.quadratic.empty()) {
        out << " + [";
        TermWriter w(out, 4);
        for (auto const &q : model.objective.quadratic) {
            if (q.i == q.j)
                w.term(2.0 * q.coef, model.vars[q.i].name + " ^ 2");
            else
                w.term(2.0 * q.coef, model.vars[q.i].name + " * " + model.vars[q.j].name);
        }
        out << " ] / 2";
    }
    out << "\n";

    out << "Subject To\n";
    for (auto const &row : model.rows) {
        out << ' ' << row.tag << ':';
        TermWriter w(out, 6);
        for (auto const &[i, coef] : row.terms)
            w.term(coef, model.vars[i].name);
        char const *sense = row.sense == RowSense::LE   ? "<="
                            : row.sense == RowSense::GE ? ">="
                                                        : "=";
        out << ' ' << sense << ' ' << num(row.rhs) << "\n";
    }

    out << "Bounds\n";
    for (auto const &v : model.vars) {
        if (v.kind == VarKind::Binary)
            continue;  // binary bounds are implied
        out << ' ' << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
    }

    if (model.numIntegers() > 0) {
        out << "Generals\n";
        for (auto const &v : model.vars)
            if (v.kind == VarKind::Integer)
                out << ' ' << v.name << "\n";
    }
    if (model.numBinaries() > 0) {
        out << "Binaries\n";
        for (auto const &v : model.vars)
            if (v.kind == VarKind::Binary)
                out << ' ' << v.name << "\n";
    }
    out << "End\n";
}

void exportModel(MiqpModel const &model, std::filesystem::path const &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    exportModel(model, out);
    if (!out)
        throw std::runtime_error("write failure on " + path.string());
}

namespace {

bool isNumber(std::string const &tok)
{
    char *end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end && *end == '\0' && end != tok.c_str();
}

double toNumber(std::string const &tok)
{
    return std::strtod(tok.c_str(), nullptr);
}

std::string lower(std::string s)
{
    for (auto &c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct Tokens {
    std::vector<std::string> toks;
    std::size_t pos = 0;

    bool done() const { return pos >= toks.size(); }
    std::string const &peek() const { return toks[pos]; }
    std::string next() { return toks[pos++]; }
    void expect(std::string const &want)
    {
        if (done() || toks[pos] != want)
            throw std::invalid_argument("lp parse: expected '" + want + "' near token "
                                        + (done() ? "<eof>" : toks[pos]));
        ++pos;
    }
};

}  // namespace

MiqpModel parseLpModel(std::istream &in)
{
    MiqpModel model;
    model.objective.constant = 0.0;

    Tokens tk;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '\\') {
            std::istringstream ls(line.substr(1));
            std::string head, key, value;
            ls >> head;
            if (head == "meta" && (ls >> key >> value)) {
                if (key == "n") model.n = std::stoi(value);
                else if (key == "m") model.m = std::stoi(value);
                else if (key == "s_max") model.s_max = std::stoi(value);
                else if (key == "start") model.start = std::stoi(value);
                else if (key == "target") model.target = std::stoi(value);
                else if (key == "lambda") model.lambda = toNumber(value);
                else if (key == "base_mass") model.base_mass = toNumber(value);
                else if (key == "l_max") model.l_max = toNumber(value);
                else if (key == "r_max") model.r_max = toNumber(value);
                else if (key == "budget") model.budget = toNumber(value);
                else if (key == "distance_cap") model.distance_cap = toNumber(value);
                else if (key == "a_max") model.a_max = toNumber(value);
                else if (key == "big_m_order") model.big_m_order = toNumber(value);
                else if (key == "big_m_load") model.big_m_load = toNumber(value);
                else if (key == "noise_variance") model.noise_variance = toNumber(value);
            }
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok)
            tk.toks.push_back(tok);
    }

    double constexpr inf = std::numeric_limits<double>::infinity();
    auto ensureVar = [&](std::string const &name) {
        if (!model.hasVar(name))
            model.addVar(name, VarKind::Continuous, 0.0, inf);
        return model.var(name);
    };

    enum class Section { None, Objective, Rows, Bounds, Generals, Binaries };
    Section section = Section::None;

    // Non-consuming: "subject" implies a following "to" handled by the caller.
    auto sectionKeyword = [](std::string const &t) -> std::optional<Section> {
        auto const low = lower(t);
        if (low == "minimize" || low == "minimise" || low == "min")
            return Section::Objective;
        if (low == "subject" || low == "st" || low == "s.t.")
            return Section::Rows;
        if (low == "bounds" || low == "bound")
            return Section::Bounds;
        if (low == "generals" || low == "general" || low == "integers" || low == "integer")
            return Section::Generals;
        if (low == "binaries" || low == "binary" || low == "bin")
            return Section::Binaries;
        if (low == "end")
            return Section::None;
        return std::nullopt;
    };

    LinRow current;
    bool in_row = false;
    double sign = 1.0;
    bool in_quad = false;
    std::vector<QuadTerm> quad;

    auto flushRow = [&]() {
        if (in_row)
            throw std::invalid_argument("lp parse: constraint " + current.tag
                                        + " has no relational operator");
    };

    while (!tk.done()) {
        auto const kw = sectionKeyword(tk.peek());
        if (kw) {
            flushRow();
            bool const was_subject = lower(tk.peek()) == "subject";
            tk.next();
            if (was_subject && !tk.done() && lower(tk.peek()) == "to")
                tk.next();
            section = *kw;
            sign = 1.0;
            continue;
        }
        std::string t = tk.next();

        switch (section) {
        case Section::Objective: {
            if (t == "+") { sign = 1.0; break; }
            if (t == "-") { sign = -1.0; break; }
            if (t == "[") { in_quad = true; sign = 1.0; break; }
            if (t == "]") {
                in_quad = false;
                tk.expect("/");
                tk.expect("2");
                for (auto &q : quad)
                    q.coef /= 2.0;
                model.objective.quadratic.insert(model.objective.quadratic.end(), quad.begin(),
                                                 quad.end());
                quad.clear();
                sign = 1.0;
                break;
            }
            if (!t.empty() && t.back() == ':')
                break;  // objective label
            if (!isNumber(t))
                throw std::invalid_argument("lp parse: unexpected objective token " + t);
            double coef = sign * toNumber(t);
            sign = 1.0;
            if (tk.done() || isNumber(tk.peek()) || tk.peek() == "+" || tk.peek() == "-"
                || tk.peek() == "]" || sectionKeyword(tk.peek())) {
                model.objective.constant += coef;  // bare constant
                break;
            }
            std::string const name = tk.next();
            if (in_quad) {
                if (!tk.done() && tk.peek() == "^") {
                    tk.next();
                    tk.expect("2");
                    int const i = ensureVar(name);
                    quad.push_back({i, i, coef});
                } else if (!tk.done() && tk.peek() == "*") {
                    tk.next();
                    std::string const other = tk.next();
                    int i = ensureVar(name), j = ensureVar(other);
                    if (i > j)
                        std::swap(i, j);
                    quad.push_back({i, j, coef});
                } else {
                    throw std::invalid_argument("lp parse: linear term inside brackets: " + name);
                }
            } else {
                model.objective.linear.emplace_back(ensureVar(name), coef);
            }
            break;
        }
        case Section::Rows: {
            if (!in_row) {
                if (t.empty() || t.back() != ':')
                    throw std::invalid_argument("lp parse: expected row label, got " + t);
                current = LinRow{};
                current.tag = t.substr(0, t.size() - 1);
                in_row = true;
                sign = 1.0;
                break;
            }
            if (t == "+") { sign = 1.0; break; }
            if (t == "-") { sign = -1.0; break; }
            if (t == "<=" || t == "<" || t == ">=" || t == ">" || t == "=") {
                current.sense = (t == "<=" || t == "<")   ? RowSense::LE
                                : (t == ">=" || t == ">") ? RowSense::GE
                                                          : RowSense::EQ;
                current.rhs = toNumber(tk.next());
                model.rows.push_back(std::move(current));
                in_row = false;
                break;
            }
            if (!isNumber(t))
                throw std::invalid_argument("lp parse: unexpected row token " + t);
            double const coef = sign * toNumber(t);
            sign = 1.0;
            current.terms.emplace_back(ensureVar(tk.next()), coef);
            break;
        }
        case Section::Bounds: {
            if (isNumber(t)) {
                double const lo = toNumber(t);
                tk.expect("<=");
                int const i = ensureVar(tk.next());
                tk.expect("<=");
                double const hi = toNumber(tk.next());
                model.vars[i].lb = lo;
                model.vars[i].ub = hi;
            } else {
                int const i = ensureVar(t);
                std::string const op = tk.next();
                if (lower(op) == "free") {
                    model.vars[i].lb = -inf;
                    model.vars[i].ub = inf;
                } else if (op == "<=") {
                    model.vars[i].ub = toNumber(tk.next());
                } else if (op == ">=") {
                    model.vars[i].lb = toNumber(tk.next());
                } else if (op == "=") {
                    double const v = toNumber(tk.next());
                    model.vars[i].lb = model.vars[i].ub = v;
                } else {
                    throw std::invalid_argument("lp parse: bad bound operator " + op);
                }
            }
            break;
        }
        case Section::Generals: {
            model.vars[ensureVar(t)].kind = VarKind::Integer;
            break;
        }
        case Section::Binaries: {
            int const i = ensureVar(t);
            model.vars[i].kind = VarKind::Binary;
            model.vars[i].lb = 0.0;
            model.vars[i].ub = 1.0;
            break;
        }
        case Section::None:
            throw std::invalid_argument("lp parse: token outside any section: " + t);
        }
    }
    flushRow();
    return model;
}

MiqpModel parseLpModel(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return parseLpModel(in);
}

}  // namespace lipp
