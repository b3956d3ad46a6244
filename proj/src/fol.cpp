#include "clausevec/fol.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace clausevec {

SymbolClass classify_symbol(std::string_view name, const SkolemPolicy& policy) {
    if (!name.empty() && std::isupper(static_cast<unsigned char>(name.front())))
        return SymbolClass::variable;
    if (policy.enabled) {
        for (const auto& prefix : policy.prefixes) {
            if (!prefix.empty() && name.substr(0, prefix.size()) == prefix)
                return SymbolClass::skolem;
        }
    }
    return SymbolClass::plain;
}

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
      line(line),
      column(column) {}

ArityError::ArityError(const std::string& symbol, int seen, int now, int line, int column)
    : ParseError("symbol '" + symbol + "' used with arity " + std::to_string(now) +
                     " but previously with arity " + std::to_string(seen),
                 line, column),
      symbol(symbol),
      arity_seen(seen),
      arity_now(now) {}

namespace {

enum class Tok {
    lparen,
    rparen,
    comma,
    dot,
    pipe,
    tilde,
    eq,
    neq,
    lower_word,
    upper_word,
    integer,
    quoted,
    dollar_word,
    end
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
public:
    Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_trivia();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Tok::end, "", line, col};
        char c = text_[pos_];
        switch (c) {
            case '(': advance(); return {Tok::lparen, "(", line, col};
            case ')': advance(); return {Tok::rparen, ")", line, col};
            case ',': advance(); return {Tok::comma, ",", line, col};
            case '.': advance(); return {Tok::dot, ".", line, col};
            case '|': advance(); return {Tok::pipe, "|", line, col};
            case '~': advance(); return {Tok::tilde, "~", line, col};
            case '=': advance(); return {Tok::eq, "=", line, col};
            case '!':
                advance();
                if (pos_ < text_.size() && text_[pos_] == '=') {
                    advance();
                    return {Tok::neq, "!=", line, col};
                }
                throw ParseError("unexpected '!'", line, col);
            case '\'': {
                advance();
                std::string word;
                while (pos_ < text_.size() && text_[pos_] != '\'') {
                    if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance();
                    word.push_back(text_[pos_]);
                    advance();
                }
                if (pos_ >= text_.size()) throw ParseError("unterminated quoted name", line, col);
                advance();  // closing quote
                return {Tok::quoted, word, line, col};
            }
            case '$': {
                advance();
                std::string word = "$";
                word += take_word();
                return {Tok::dollar_word, word, line, col};
            }
            default:
                break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            std::string num;
            if (c == '-') {
                num.push_back('-');
                advance();
            }
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                num.push_back(text_[pos_]);
                advance();
            }
            return {Tok::integer, num, line, col};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word = take_word();
            bool upper = std::isupper(static_cast<unsigned char>(word.front()));
            return {upper ? Tok::upper_word : Tok::lower_word, word, line, col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string take_word() {
        std::string word;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                word.push_back(c);
                advance();
            } else {
                break;
            }
        }
        return word;
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                int line = line_, col = col_;
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size())
                    throw ParseError("unterminated block comment", line, col);
                advance();
                advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Incremental signature check; records each symbol the first time it is seen
// and rejects later uses with a different arity or kind.
class SignatureBuilder {
public:
    void record(const std::string& name, SymbolKind kind, int arity, int line, int col) {
        auto it = sig_.find(name);
        if (it == sig_.end()) {
            sig_.emplace(name, SymbolInfo{kind, arity});
            return;
        }
        if (it->second.kind != kind)
            throw ParseError("symbol '" + name + "' used both as predicate and as function",
                             line, col);
        if (it->second.arity != arity)
            throw ArityError(name, it->second.arity, arity, line, col);
    }

    std::map<std::string, SymbolInfo> take() { return std::move(sig_); }

private:
    std::map<std::string, SymbolInfo> sig_;
};

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts, SignatureBuilder& sig,
           std::set<std::string>* open_files)
        : lexer_(text), opts_(opts), sig_(sig), open_files_(open_files) {
        bump();
    }

    void parse_into(std::vector<Clause>& out) {
        while (cur_.kind != Tok::end) {
            if (cur_.kind == Tok::lower_word && cur_.text == "cnf") {
                out.push_back(parse_cnf_statement());
            } else if (cur_.kind == Tok::lower_word && cur_.text == "include") {
                parse_include(out);
            } else {
                throw ParseError("expected 'cnf' or 'include', got '" + cur_.text + "'",
                                 cur_.line, cur_.column);
            }
        }
    }

private:
    void bump() { cur_ = lexer_.next(); }

    Token expect(Tok kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(std::string("expected ") + what + ", got '" + cur_.text + "'",
                             cur_.line, cur_.column);
        Token t = cur_;
        bump();
        return t;
    }

    Clause parse_cnf_statement() {
        bump();  // cnf
        expect(Tok::lparen, "'('");
        Clause clause;
        if (cur_.kind == Tok::lower_word || cur_.kind == Tok::integer ||
            cur_.kind == Tok::quoted || cur_.kind == Tok::upper_word) {
            clause.id = cur_.text;
            bump();
        } else {
            throw ParseError("expected clause name", cur_.line, cur_.column);
        }
        expect(Tok::comma, "','");
        Token role = expect(Tok::lower_word, "role");
        clause.role = role_from_string(role.text);
        expect(Tok::comma, "','");
        parse_disjunction(clause.literals, /*depth=*/0);
        expect(Tok::rparen, "')'");
        expect(Tok::dot, "'.'");
        return clause;
    }

    ClauseRole role_from_string(const std::string& s) {
        if (s == "negated_conjecture") return ClauseRole::negated_conjecture;
        if (s == "plain" || s == "derived") return ClauseRole::derived;
        return ClauseRole::axiom;
    }

    // disjunction := factor ('|' factor)* ; factor := literal | '(' disjunction ')'
    // Nested grouping is accepted and flattened; literal order is preserved.
    void parse_disjunction(std::vector<Literal>& lits, int depth) {
        parse_factor(lits, depth);
        while (cur_.kind == Tok::pipe) {
            bump();
            parse_factor(lits, depth);
        }
    }

    void parse_factor(std::vector<Literal>& lits, int depth) {
        if (cur_.kind == Tok::lparen) {
            bump();
            parse_disjunction(lits, depth + 1);
            expect(Tok::rparen, "')'");
            return;
        }
        if (cur_.kind == Tok::dollar_word) {
            // $false is the empty disjunction and contributes no literal.
            if (cur_.text == "$false") {
                bump();
                return;
            }
            throw ParseError("unsupported defined atom '" + cur_.text + "'", cur_.line,
                             cur_.column);
        }
        lits.push_back(parse_literal());
    }

    Literal parse_literal() {
        Literal lit;
        if (cur_.kind == Tok::tilde) {
            lit.polarity = Polarity::negative;
            bump();
        }
        Token head = cur_;
        Term first = parse_term();
        if (cur_.kind == Tok::eq || cur_.kind == Tok::neq) {
            bool negated = cur_.kind == Tok::neq;
            bump();
            Term rhs = parse_term();
            if (negated)
                lit.polarity = lit.polarity == Polarity::negative ? Polarity::positive
                                                                  : Polarity::negative;
            lit.predicate = "=";
            lit.args = {std::move(first), std::move(rhs)};
        } else {
            // Not an equality: the parsed term must be a predicate application.
            if (first.kind == TermKind::variable)
                throw ParseError("expected predicate, got variable '" + first.name + "'",
                                 head.line, head.column);
            lit.predicate = std::move(first.name);
            lit.args = std::move(first.args);
        }
        record_literal(lit, head);
        return lit;
    }

    void record_literal(const Literal& lit, const Token& at) {
        sig_.record(lit.predicate, SymbolKind::predicate, static_cast<int>(lit.args.size()),
                    at.line, at.column);
        for (const auto& arg : lit.args) record_term(arg, at);
    }

    void record_term(const Term& t, const Token& at) {
        if (t.kind == TermKind::variable) return;
        sig_.record(t.name, SymbolKind::function, static_cast<int>(t.args.size()), at.line,
                    at.column);
        for (const auto& arg : t.args) record_term(arg, at);
    }

    Term parse_term() {
        if (cur_.kind == Tok::upper_word) {
            Term t = Term::var(cur_.text);
            bump();
            return t;
        }
        if (cur_.kind == Tok::integer || cur_.kind == Tok::quoted) {
            Token tok = cur_;
            bump();
            return Term::fn(tok.text);
        }
        Token head = expect(Tok::lower_word, "term");
        std::vector<Term> args;
        if (cur_.kind == Tok::lparen) {
            bump();
            args.push_back(parse_term());
            while (cur_.kind == Tok::comma) {
                bump();
                args.push_back(parse_term());
            }
            expect(Tok::rparen, "')'");
        }
        return Term::fn(head.text, std::move(args));
    }

    void parse_include(std::vector<Clause>& out) {
        Token inc = cur_;
        bump();  // include
        expect(Tok::lparen, "'('");
        std::string path;
        if (cur_.kind == Tok::quoted || cur_.kind == Tok::lower_word) {
            path = cur_.text;
            bump();
        } else {
            throw ParseError("expected include path", cur_.line, cur_.column);
        }
        if (cur_.kind == Tok::comma)
            throw IncludeError("include selection lists are not supported", cur_.line,
                               cur_.column);
        expect(Tok::rparen, "')'");
        expect(Tok::dot, "'.'");

        if (!opts_.include_root)
            throw IncludeError("unresolved include '" + path + "' (no include root configured)",
                               inc.line, inc.column);
        std::filesystem::path full = std::filesystem::path(*opts_.include_root) / path;
        std::string canonical = full.lexically_normal().string();
        if (open_files_ && open_files_->count(canonical))
            throw IncludeError("cyclic include of '" + path + "'", inc.line, inc.column);
        std::ifstream in(full);
        if (!in)
            throw IncludeError("cannot open include '" + full.string() + "'", inc.line,
                               inc.column);
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        if (open_files_) open_files_->insert(canonical);
        Parser sub(text, opts_, sig_, open_files_);
        sub.parse_into(out);
        if (open_files_) open_files_->erase(canonical);
    }

    Lexer lexer_;
    Token cur_{Tok::end, "", 0, 0};
    const ParseOptions& opts_;
    SignatureBuilder& sig_;
    std::set<std::string>* open_files_;
};

void collect_term(const Term& t, std::map<std::string, SymbolInfo>& sig) {
    if (t.kind == TermKind::variable) return;
    auto it = sig.find(t.name);
    int arity = static_cast<int>(t.args.size());
    if (it == sig.end()) {
        sig.emplace(t.name, SymbolInfo{SymbolKind::function, arity});
    } else if (it->second.kind != SymbolKind::function) {
        throw ParseError("symbol '" + t.name + "' used both as predicate and as function", 0, 0);
    } else if (it->second.arity != arity) {
        throw ArityError(t.name, it->second.arity, arity, 0, 0);
    }
    for (const auto& a : t.args) collect_term(a, sig);
}

}  // namespace

std::map<std::string, SymbolInfo> compute_signature(const std::vector<Clause>& clauses) {
    std::map<std::string, SymbolInfo> sig;
    for (const auto& clause : clauses) {
        for (const auto& lit : clause.literals) {
            auto it = sig.find(lit.predicate);
            int arity = static_cast<int>(lit.args.size());
            if (it == sig.end()) {
                sig.emplace(lit.predicate, SymbolInfo{SymbolKind::predicate, arity});
            } else if (it->second.kind != SymbolKind::predicate) {
                throw ParseError(
                    "symbol '" + lit.predicate + "' used both as predicate and as function", 0,
                    0);
            } else if (it->second.arity != arity) {
                throw ArityError(lit.predicate, it->second.arity, arity, 0, 0);
            }
            for (const auto& a : lit.args) collect_term(a, sig);
        }
    }
    return sig;
}

Problem parse_cnf_problem(std::string_view text, const ParseOptions& opts) {
    SignatureBuilder sig;
    std::set<std::string> open_files;
    Parser parser(text, opts, sig, &open_files);
    Problem problem;
    parser.parse_into(problem.clauses);
    problem.signature = compute_signature(problem.clauses);
    return problem;
}

// --- printing ---------------------------------------------------------------

std::string term_to_string(const Term& term) {
    std::string out = term.name;
    if (!term.args.empty()) {
        out += "(";
        for (size_t i = 0; i < term.args.size(); ++i) {
            if (i) out += ",";
            out += term_to_string(term.args[i]);
        }
        out += ")";
    }
    return out;
}

std::string literal_to_string(const Literal& literal) {
    if (literal.predicate == "=" && literal.args.size() == 2) {
        return term_to_string(literal.args[0]) +
               (literal.is_negative() ? " != " : " = ") + term_to_string(literal.args[1]);
    }
    std::string out = literal.is_negative() ? "~" : "";
    out += literal.predicate;
    if (!literal.args.empty()) {
        out += "(";
        for (size_t i = 0; i < literal.args.size(); ++i) {
            if (i) out += ",";
            out += term_to_string(literal.args[i]);
        }
        out += ")";
    }
    return out;
}

namespace {

const char* role_to_string(ClauseRole role) {
    switch (role) {
        case ClauseRole::axiom: return "axiom";
        case ClauseRole::negated_conjecture: return "negated_conjecture";
        case ClauseRole::derived: return "plain";
    }
    return "axiom";
}

}  // namespace

std::string clause_to_string(const Clause& clause, int auto_index) {
    std::string id = clause.id.empty() ? "c" + std::to_string(auto_index) : clause.id;
    std::string body;
    if (clause.literals.empty()) {
        body = "$false";
    } else if (clause.literals.size() == 1) {
        body = literal_to_string(clause.literals[0]);
    } else {
        body = "(";
        for (size_t i = 0; i < clause.literals.size(); ++i) {
            if (i) body += " | ";
            body += literal_to_string(clause.literals[i]);
        }
        body += ")";
    }
    return "cnf(" + id + ", " + role_to_string(clause.role) + ", " + body + ").";
}

std::string problem_to_string(const Problem& problem) {
    std::string out;
    for (size_t i = 0; i < problem.clauses.size(); ++i) {
        out += clause_to_string(problem.clauses[i], static_cast<int>(i + 1));
        out += "\n";
    }
    return out;
}

namespace {

void collect_vars(const Term& t, std::vector<std::string>& out) {
    if (t.kind == TermKind::variable) {
        for (const auto& v : out)
            if (v == t.name) return;
        out.push_back(t.name);
        return;
    }
    for (const auto& a : t.args) collect_vars(a, out);
}

}  // namespace

std::vector<std::string> clause_variables(const Clause& clause) {
    std::vector<std::string> vars;
    for (const auto& lit : clause.literals)
        for (const auto& a : lit.args) collect_vars(a, vars);
    return vars;
}

}  // namespace clausevec
