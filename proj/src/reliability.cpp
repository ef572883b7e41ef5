#include <map>
#include <set>

#include "analyzer_util.hpp"
#include "codequal/analyzers.hpp"

namespace codequal {

using namespace detail;

// ---------------------------------------------------------------------------
// Exceptions and resources

namespace {

bool reraises(const Node& handler_body) {
    bool found = false;
    py::walk_scope(handler_body, [&](const Node& n) {
        if (n.is(NodeKind::Raise)) found = true;
    });
    return found;
}

bool logs(const Node& handler_body, const py::ImportBindings& imports) {
    static const std::set<std::string> kLogMethods{"exception", "error", "warning", "warn", "critical",
                                                   "info",      "debug", "log",     "fatal"};
    bool found = false;
    py::walk_scope(handler_body, [&](const Node& n) {
        if (found || !n.is(NodeKind::Call)) return;
        const std::string callee = imports.resolve(*n.child(0));
        if (callee.starts_with("traceback.print_exc") || callee.starts_with("traceback.print_exception") ||
            callee == "warnings.warn") {
            found = true;
            return;
        }
        const auto dot = callee.rfind('.');
        if (dot == std::string::npos || !kLogMethods.count(callee.substr(dot + 1))) return;
        found = lowercase(callee.substr(0, dot)).find("log") != std::string::npos;
    });
    return found;
}

bool only_pass(const Node& body) {
    return !body.children.empty() && std::all_of(body.children.begin(), body.children.end(), [](const auto& s) {
        return s->is(NodeKind::Pass) ||
               (s->is(NodeKind::ExprStmt) && s->child(0)->is(NodeKind::Constant) &&
                s->child(0)->const_kind == py::ConstKind::Ellipsis);
    });
}

bool broad_type(const Node& type) {
    if (type.is(NodeKind::Tuple))
        return std::any_of(type.children.begin(), type.children.end(), [](const auto& c) { return broad_type(*c); });
    const std::string name = py::dotted_name(type);
    return name == "Exception" || name == "BaseException" || name == "builtins.Exception" ||
           name == "builtins.BaseException";
}

const std::set<std::string> kFileOpeners{"open",     "io.open",   "codecs.open", "os.fdopen",   "gzip.open",
                                         "bz2.open", "lzma.open", "tarfile.open", "zipfile.ZipFile"};

/// True when the scope closes, hands off or manages `name`.
bool resource_released(const Node& body, const std::string& name) {
    bool released = false;
    auto mentions = [&](const Node& e) {
        bool hit = false;
        py::walk(e, [&](const Node& n) {
            if (n.is(NodeKind::Name) && n.text == name) hit = true;
            return !hit;
        });
        return hit;
    };
    py::walk(body, [&](const Node& n) {
        if (released) return false;
        if (n.is(NodeKind::Call)) {
            const Node& f = *n.child(0);
            if (f.is(NodeKind::Attribute) && (f.text == "close" || f.text == "__exit__") &&
                f.child(0)->is(NodeKind::Name) && f.child(0)->text == name)
                released = true;
            // Registered cleanups: stack.enter_context(f), atexit.register(f.close)...
            if (f.is(NodeKind::Attribute) && (f.text == "enter_context" || f.text == "register" || f.text == "callback"))
                for (std::size_t i = 1; i < n.size(); ++i)
                    if (mentions(*n.child(i))) released = true;
        } else if (n.is(NodeKind::WithItem)) {
            if (mentions(*n.child(0))) released = true;
        } else if (n.is(NodeKind::Return) || n.is(NodeKind::Yield) || n.is(NodeKind::YieldFrom)) {
            // Only the handle itself escapes; `return f.read()` still leaks it.
            if (const Node* v = n.child(0)) {
                if (v->is(NodeKind::Name) && v->text == name) released = true;
                if (v->is(NodeKind::Tuple) || v->is(NodeKind::List))
                    for (const auto& c : v->children)
                        if (c->is(NodeKind::Name) && c->text == name) released = true;
            }
        } else if (n.is(NodeKind::Assign) || n.is(NodeKind::AnnAssign)) {
            // Ownership moves when the handle is stored somewhere else.
            const Node* value = n.is(NodeKind::AnnAssign) ? n.child(2) : n.children.back().get();
            if (value && value->is(NodeKind::Name) && value->text == name) released = true;
            if (value && (value->is(NodeKind::Tuple) || value->is(NodeKind::List) || value->is(NodeKind::Dict)) &&
                mentions(*value))
                released = true;
        } else if (n.is(NodeKind::Global)) {
            for (const auto& c : n.children)
                if (c->text == name) released = true;
        }
        return true;
    });
    if (released) return true;
    // Appending the handle to a container also transfers ownership.
    py::walk(body, [&](const Node& n) {
        if (n.is(NodeKind::Call) && n.child(0)->is(NodeKind::Attribute)) {
            const std::string& m = n.child(0)->text;
            if (m == "append" || m == "add" || m == "put" || m == "setdefault")
                for (std::size_t i = 1; i < n.size(); ++i)
                    if (n.child(i)->is(NodeKind::Name) && n.child(i)->text == name) released = true;
        }
        return !released;
    });
    return released;
}

}  // namespace

std::vector<Finding> detect_exception_issues(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());

    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (!n.is(NodeKind::ExceptHandler)) return true;
        const Node* type = n.child(0);
        const Node& body = *n.child(1);
        if (reraises(body)) return true;
        const bool empty = only_pass(body);
        const Span span = unit.span_of(n);
        if (!type) {
            out.push_back(make_finding("REL-BARE-EXCEPT", span,
                                       empty ? "bare except clause silently swallows every exception"
                                             : "bare except clause catches every exception, including exits"));
        } else {
            if (empty)
                out.push_back(make_finding("REL-EMPTY-EXCEPT", span, "exception handler body only passes"));
            if (broad_type(*type) && !logs(body, imports))
                out.push_back(make_finding("REL-BROAD-EXCEPT", span,
                                           "catching '" + py::dotted_name(*type) +
                                               "' without re-raising or logging hides unrelated errors"));
        }
        return true;
    });

    for (const Scope& scope : code_scopes(unit)) {
        py::walk_scope(*scope.body, [&](const Node& n) {
            if (!n.is(NodeKind::Assign) || n.size() != 2 || !n.child(0)->is(NodeKind::Name)) return;
            const Node& value = *n.child(1);
            if (!value.is(NodeKind::Call) || !kFileOpeners.count(imports.resolve(*value.child(0)))) return;
            const std::string& name = n.child(0)->text;
            if (resource_released(*scope.body, name)) return;
            out.push_back(make_finding("REL-UNCLOSED-RESOURCE", unit.span_of(n),
                                       "file handle '" + name + "' is never closed or used in a with statement"));
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Locks

namespace {

const std::set<std::string> kLockConstructors{
    "threading.Lock",       "threading.RLock",       "threading.Semaphore", "threading.BoundedSemaphore",
    "threading.Condition",  "multiprocessing.Lock",  "multiprocessing.RLock", "asyncio.Lock",
    "asyncio.Semaphore",    "_thread.allocate_lock", "thread.allocate_lock"};

class LockCatalog {
public:
    LockCatalog(const Node& module, const py::ImportBindings& imports) {
        py::walk(module, [&](const Node& n) {
            if (n.is(NodeKind::Assign) && n.children.back()->is(NodeKind::Call) &&
                kLockConstructors.count(imports.resolve(*n.children.back()->child(0))))
                for (std::size_t i = 0; i + 1 < n.size(); ++i) {
                    const std::string name = py::dotted_name(*n.child(i));
                    if (!name.empty()) known_.insert(name);
                }
            return true;
        });
    }

    /// Lock identity of a with-item expression, or empty.
    std::string with_lock(const Node& expr) const {
        const std::string name = py::dotted_name(expr);
        if (name.empty()) return {};
        if (known_.count(name)) return name;
        const std::string last = lowercase(name.substr(name.rfind('.') == std::string::npos ? 0 : name.rfind('.') + 1));
        return last.find("lock") != std::string::npos || last.find("mutex") != std::string::npos ? name : "";
    }

private:
    std::set<std::string> known_;
};

/// Receiver of `X.<method>(...)`, or empty.
std::string method_receiver(const Node& e, std::string_view method) {
    if (!e.is(NodeKind::Call) || !e.child(0)->is(NodeKind::Attribute) || e.child(0)->text != method) return {};
    return py::dotted_name(*e.child(0)->child(0));
}

std::string statement_call_receiver(const Node& stmt, std::string_view method) {
    const Node* value = nullptr;
    if (stmt.is(NodeKind::ExprStmt)) value = stmt.child(0);
    else if (stmt.is(NodeKind::Assign)) value = stmt.children.back().get();
    if (value && value->is(NodeKind::Await)) value = value->child(0);
    return value ? method_receiver(*value, method) : std::string();
}

/// (held, acquired) pairs in program order for one function body.
class OrderCollector {
public:
    explicit OrderCollector(const LockCatalog& locks) : locks_(locks) {}

    void block(const Node* b) {
        if (!b) return;
        for (const auto& s : b->children) statement(*s);
    }

    std::map<std::pair<std::string, std::string>, const Node*> pairs;

private:
    void acquire(const std::string& lock, const Node& at) {
        for (const auto& h : held_)
            if (h != lock) pairs.emplace(std::make_pair(h, lock), &at);
        held_.push_back(lock);
    }
    void release(const std::string& lock) {
        auto it = std::find(held_.rbegin(), held_.rend(), lock);
        if (it != held_.rend()) held_.erase(std::next(it).base());
    }

    void statement(const Node& s) {
        if (py::opens_scope(s)) return;
        if (auto r = statement_call_receiver(s, "acquire"); !r.empty()) return acquire(r, s);
        if (auto r = statement_call_receiver(s, "release"); !r.empty()) return release(r);
        if (s.is(NodeKind::With)) {
            std::vector<std::string> taken;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                const std::string lock = locks_.with_lock(*s.child(i)->child(0));
                if (!lock.empty()) {
                    acquire(lock, *s.child(i));
                    taken.push_back(lock);
                }
            }
            block(s.children.back().get());
            for (auto it = taken.rbegin(); it != taken.rend(); ++it) release(*it);
            return;
        }
        if (s.is(NodeKind::If)) {
            if (auto r = method_receiver(*s.child(0), "acquire"); !r.empty()) acquire(r, s);
        }
        for (const auto& c : s.children) {
            if (!c) continue;
            if (c->is(NodeKind::Block)) block(c.get());
            else if (c->is(NodeKind::ExceptHandler) || c->is(NodeKind::MatchCase))
                block(c->children.back().get());
        }
    }

    const LockCatalog& locks_;
    std::vector<std::string> held_;
};

// Path states of one lock: bit 0 = not held, bit 1 = held.
constexpr unsigned kFree = 1, kHeld = 2;

/// Finds a path from an acquire of `lock` to a function exit that never
/// releases it. Implicit exceptions from ordinary statements are ignored;
/// explicit raise statements are followed.
class ReleaseChecker {
public:
    explicit ReleaseChecker(std::string lock) : lock_(std::move(lock)) {}

    bool leaks(const Node& body) {
        const unsigned end = block(&body, kFree);
        return leaked_ || (end & kHeld);
    }

private:
    struct TryFrame {
        bool finally_releases = false;
        bool has_handlers = false;
        bool in_body = false;
        unsigned raised = 0;
    };
    struct LoopFrame {
        unsigned breaks = 0;
        unsigned continues = 0;
    };

    unsigned block(const Node* b, unsigned st) {
        if (!b) return st;
        for (const auto& s : b->children) {
            if (st == 0) break;
            st = statement(*s, st);
        }
        return st;
    }

    bool covered_by_finally() const {
        return std::any_of(tries_.begin(), tries_.end(), [](const TryFrame& f) { return f.finally_releases; });
    }

    void exit_with(unsigned st) {
        if ((st & kHeld) && !covered_by_finally()) leaked_ = true;
    }

    unsigned statement(const Node& s, unsigned st) {
        if (py::opens_scope(s)) return st;
        if (statement_call_receiver(s, "acquire") == lock_) return kHeld;
        if (statement_call_receiver(s, "release") == lock_) return kFree;
        switch (s.kind) {
            case NodeKind::Return:
                exit_with(st);
                return 0;
            case NodeKind::Raise:
                if (!tries_.empty() && tries_.back().in_body && tries_.back().has_handlers)
                    tries_.back().raised |= st;
                else
                    exit_with(st);
                return 0;
            case NodeKind::Break:
                if (!loops_.empty()) loops_.back().breaks |= st;
                return 0;
            case NodeKind::Continue:
                if (!loops_.empty()) loops_.back().continues |= st;
                return 0;
            case NodeKind::If: {
                const bool acquires = method_receiver(*s.child(0), "acquire") == lock_;
                return block(s.child(1), acquires ? kHeld : st) | block(s.child(2), st);
            }
            case NodeKind::For:
            case NodeKind::While: {
                const bool is_for = s.is(NodeKind::For);
                const Node* body = s.child(is_for ? 2 : 1);
                const Node* orelse = s.child(is_for ? 3 : 2);
                const Node* test = is_for ? nullptr : s.child(0);
                const bool endless = test && test->is(NodeKind::Constant) && test->const_kind == py::ConstKind::True;
                loops_.push_back({});
                unsigned in = st;
                for (int i = 0; i < 4; ++i) {
                    const unsigned next = in | block(body, in) | loops_.back().continues;
                    if (next == in) break;
                    in = next;
                }
                const unsigned breaks = loops_.back().breaks;
                loops_.pop_back();
                return (endless ? 0u : block(orelse, in)) | breaks;
            }
            case NodeKind::With: return block(s.children.back().get(), st);
            case NodeKind::Try: {
                TryFrame frame;
                frame.has_handlers = s.child(1)->size() > 0;
                if (const Node* fin = s.child(3)) {
                    ReleaseChecker probe(lock_);
                    frame.finally_releases = probe.block(fin, kHeld) == kFree;
                }
                frame.in_body = true;
                tries_.push_back(frame);
                const unsigned body_out = block(s.child(0), st);
                tries_.back().in_body = false;
                const unsigned handler_in = st | body_out | tries_.back().raised;
                unsigned handlers_out = 0;
                for (const auto& h : s.child(1)->children) handlers_out |= block(h->child(1), handler_in);
                const unsigned else_out = s.child(2) ? block(s.child(2), body_out) : body_out;
                tries_.pop_back();
                return block(s.child(3), else_out | handlers_out);
            }
            case NodeKind::Match: {
                unsigned outs = st;
                for (std::size_t i = 1; i < s.size(); ++i) outs |= block(s.child(i)->child(2), st);
                return outs;
            }
            default:
                return st;
        }
    }

    std::string lock_;
    bool leaked_ = false;
    std::vector<TryFrame> tries_;
    std::vector<LoopFrame> loops_;
};

bool manages_lock_elsewhere(std::string_view fn_name) {
    return fn_name == "__enter__" || fn_name == "__aenter__" || fn_name.starts_with("acquire") ||
           fn_name.starts_with("lock") || fn_name.starts_with("_acquire") || fn_name.starts_with("_lock");
}

}  // namespace

std::vector<Finding> detect_concurrency_issues(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());
    const LockCatalog locks(unit.syntax_root(), imports);

    struct Order {
        const FunctionInfo* fn;
        std::map<std::pair<std::string, std::string>, const Node*> pairs;
    };
    std::vector<Order> orders;
    for (const auto& fn : unit.function_index()) {
        OrderCollector c(locks);
        c.block(&py::function_body(*fn.node));
        if (!c.pairs.empty()) orders.push_back({&fn, std::move(c.pairs)});
    }
    std::set<std::pair<std::string, std::string>> reported;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        for (std::size_t j = i + 1; j < orders.size(); ++j) {
            for (const auto& [pair, at] : orders[i].pairs) {
                auto rev = orders[j].pairs.find({pair.second, pair.first});
                if (rev == orders[j].pairs.end()) continue;
                const auto key = std::minmax(pair.first, pair.second);
                if (!reported.insert({key.first, key.second}).second) continue;
                // Report at whichever conflicting acquisition comes later in the file.
                const Span a = unit.span_of(*at);
                const Span b = unit.span_of(*rev->second);
                out.push_back(make_finding("REL-LOCK-ORDER", a < b ? b : a,
                                           "locks '" + key.first + "' and '" + key.second +
                                               "' are acquired in opposite orders by '" +
                                               orders[i].fn->qualified_name + "' and '" +
                                               orders[j].fn->qualified_name + "'"));
            }
        }
    }

    for (const Scope& scope : code_scopes(unit)) {
        if (scope.owner && manages_lock_elsewhere(scope.owner->text)) continue;
        std::map<std::string, const Node*> first_acquire;
        py::walk_scope(*scope.body, [&](const Node& n) {
            const std::string r = method_receiver(n, "acquire");
            if (!r.empty()) first_acquire.emplace(r, &n);
        });
        for (const auto& [lock, at] : first_acquire) {
            ReleaseChecker checker(lock);
            if (checker.leaks(*scope.body))
                out.push_back(make_finding("REL-LOCK-NOT-RELEASED", unit.span_of(*at),
                                           "'" + lock + "' is acquired but not released on every path"));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loops

namespace {

bool constant_truthy(const Node& e) {
    if (e.is(NodeKind::UnaryOp) && e.text == "not") {
        const Node& x = *e.child(0);
        return x.is(NodeKind::Constant) && !constant_truthy(x) && x.const_kind != py::ConstKind::Ellipsis;
    }
    if (!e.is(NodeKind::Constant)) return false;
    switch (e.const_kind) {
        case py::ConstKind::True:
        case py::ConstKind::Ellipsis: return true;
        case py::ConstKind::Int:
        case py::ConstKind::Float: return e.text.find_first_not_of("0._xXoObB") != std::string::npos;
        case py::ConstKind::Complex: return e.text.find_first_not_of("0._jJ") != std::string::npos;
        case py::ConstKind::Str:
        case py::ConstKind::Bytes: return !e.text.empty();
        default: return false;
    }
}

bool endless_iterator(const Node& iter, const py::ImportBindings& imports) {
    if (!iter.is(NodeKind::Call)) return false;
    const std::string callee = imports.resolve(*iter.child(0));
    if (callee == "itertools.count" || callee == "itertools.cycle") return true;
    if (callee == "itertools.repeat") return iter.size() == 2 && !py::keyword_argument(iter, "times");
    return false;
}

/// Variables a loop condition reads directly; callees and the roots of
/// attribute or subscript chains are left out.
std::set<std::string> condition_names(const Node& cond, bool& opaque) {
    std::set<std::string> out;
    py::walk(cond, [&](const Node& n) {
        if (n.is(NodeKind::NamedExpr) || n.is(NodeKind::Await) || n.is(NodeKind::Yield) ||
            n.is(NodeKind::YieldFrom))
            opaque = true;
        if (py::opens_scope(n)) return false;
        if (n.is(NodeKind::Call)) {
            for (std::size_t i = 1; i < n.size(); ++i) {
                const Node* arg = n.child(i);
                const Node* v = arg->is(NodeKind::Keyword) || arg->is(NodeKind::Starred) ? arg->child(0) : arg;
                for (auto& x : condition_names(*v, opaque)) out.insert(x);
            }
            return false;
        }
        if (n.is(NodeKind::Attribute) || n.is(NodeKind::Subscript)) {
            if (n.is(NodeKind::Subscript))
                for (auto& x : condition_names(*n.child(1), opaque)) out.insert(x);
            return false;
        }
        if (n.is(NodeKind::Name)) out.insert(n.text);
        return true;
    });
    return out;
}

}  // namespace

std::vector<Finding> detect_infinite_loops(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());
    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (n.is(NodeKind::While)) {
            const Node& test = *n.child(0);
            const Node& body = *n.child(1);
            if (py::contains_loop_exit(body, imports)) return true;
            if (test.is(NodeKind::Constant) && test.const_kind == py::ConstKind::True) {
                out.push_back(make_finding("REL-INFINITE-LOOP", unit.span_of(n),
                                           "'while True' loop has no break, return or raise"));
            } else if (constant_truthy(test)) {
                out.push_back(make_finding("REL-MISSING-EXIT-CONDITION", unit.span_of(n),
                                           "loop condition is constant and the body has no exit"));
            } else {
                bool opaque = false;
                const std::set<std::string> names = condition_names(test, opaque);
                if (opaque || names.empty()) return true;
                const std::set<std::string> modified = possibly_modified_names(body);
                if (std::none_of(names.begin(), names.end(), [&](const auto& x) { return modified.count(x) > 0; })) {
                    std::string list;
                    for (const auto& x : names) list += (list.empty() ? "" : ", ") + x;
                    out.push_back(make_finding("REL-UNCHANGING-LOOP-CONDITION", unit.span_of(n),
                                               "no variable of the loop condition (" + list +
                                                   ") changes inside the loop body"));
                }
            }
        } else if (n.is(NodeKind::For) && endless_iterator(*n.child(1), imports) &&
                   !py::contains_loop_exit(*n.child(2), imports)) {
            out.push_back(make_finding("REL-MISSING-EXIT-CONDITION", unit.span_of(n),
                                       "loop over an endless iterator has no break, return or raise"));
        }
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Types

namespace {

const std::set<std::string> kScalarTypes{"int", "float", "complex", "str", "bytes", "bool"};

/// Builtin scalar type of a literal, or empty.
std::string literal_type(const Node& e) {
    const Node* c = &e;
    if (e.is(NodeKind::UnaryOp) && (e.text == "-" || e.text == "+")) {
        c = e.child(0);
        if (!c->is(NodeKind::Constant) ||
            !(c->const_kind == py::ConstKind::Int || c->const_kind == py::ConstKind::Float ||
              c->const_kind == py::ConstKind::Complex))
            return {};
    }
    if (!c->is(NodeKind::Constant)) return {};
    switch (c->const_kind) {
        case py::ConstKind::Int: return "int";
        case py::ConstKind::Float: return "float";
        case py::ConstKind::Complex: return "complex";
        case py::ConstKind::Str: return "str";
        case py::ConstKind::Bytes: return "bytes";
        case py::ConstKind::True:
        case py::ConstKind::False: return "bool";
        case py::ConstKind::None: return "None";
        default: return {};
    }
}

/// Whether a literal of type `lit` is acceptable where `declared` is expected,
/// following the numeric tower (bool <: int <: float <: complex).
bool assignable(const std::string& lit, const std::string& declared) {
    static const std::map<std::string, int> kTower{{"bool", 0}, {"int", 1}, {"float", 2}, {"complex", 3}};
    if (lit == declared) return true;
    auto a = kTower.find(lit);
    auto b = kTower.find(declared);
    return a != kTower.end() && b != kTower.end() && a->second <= b->second && declared != "bool";
}

std::string scalar_annotation(const Node* ann) {
    if (!ann || !ann->is(NodeKind::Name) || !kScalarTypes.count(ann->text)) return {};
    return ann->text;
}

struct Signature {
    std::vector<const Node*> positional;  // positional-only then normal
    std::size_t positional_only = 0;
    std::vector<const Node*> keyword_only;
    bool varargs = false;
    bool varkw = false;
};

Signature signature_of(const Node& fn) {
    Signature sig;
    for (const auto& p : py::function_args(fn).children) {
        switch (p->param_kind) {
            case py::ParamKind::PositionalOnly:
                sig.positional.push_back(p.get());
                ++sig.positional_only;
                break;
            case py::ParamKind::Normal: sig.positional.push_back(p.get()); break;
            case py::ParamKind::VarArgs: sig.varargs = true; break;
            case py::ParamKind::KeywordOnly: sig.keyword_only.push_back(p.get()); break;
            case py::ParamKind::VarKeywords: sig.varkw = true; break;
        }
    }
    return sig;
}

/// Describes an arity error of `call` against `sig`, or returns empty.
std::string arity_error(const Node& call, const Signature& sig, const std::string& name) {
    std::size_t given = 0;
    std::vector<std::string> keywords;
    for (std::size_t i = 1; i < call.size(); ++i) {
        const Node* a = call.child(i);
        if (a->is(NodeKind::Starred) || (a->is(NodeKind::Keyword) && a->text.empty())) return {};
        if (a->is(NodeKind::Keyword)) keywords.push_back(a->text);
        else ++given;
    }
    if (given > sig.positional.size() && !sig.varargs)
        return name + "() takes " + std::to_string(sig.positional.size()) + " positional argument(s) but " +
               std::to_string(given) + " were given";
    std::set<std::string> bound;
    for (std::size_t i = 0; i < std::min(given, sig.positional.size()); ++i) bound.insert(sig.positional[i]->text);
    for (const auto& kw : keywords) {
        bool known = false;
        for (std::size_t i = sig.positional_only; i < sig.positional.size(); ++i)
            known = known || sig.positional[i]->text == kw;
        for (const Node* p : sig.keyword_only) known = known || p->text == kw;
        if (known && bound.count(kw)) return name + "() got multiple values for argument '" + kw + "'";
        if (!known && !sig.varkw) return name + "() got an unexpected keyword argument '" + kw + "'";
        if (known) bound.insert(kw);
    }
    for (const Node* p : sig.positional)
        if (!p->child(1) && !bound.count(p->text)) return name + "() missing required argument '" + p->text + "'";
    for (const Node* p : sig.keyword_only)
        if (!p->child(1) && !bound.count(p->text))
            return name + "() missing required keyword-only argument '" + p->text + "'";
    return {};
}

}  // namespace

std::vector<Finding> detect_type_safety_issues(const SourceUnit& unit) {
    std::vector<Finding> out;
    const Node& module = unit.syntax_root();

    for (const auto& fn : unit.function_index()) {
        if (fn.is_nested || fn.name.starts_with('_')) continue;
        std::vector<std::string> missing;
        bool first = true;
        for (const auto& p : py::function_args(*fn.node).children) {
            const bool receiver = first && fn.is_method && (p->text == "self" || p->text == "cls");
            first = false;
            if (!receiver && !p->child(0)) missing.push_back(p->text);
        }
        if (missing.empty() && fn.has_return_annotation) continue;
        std::string what;
        if (!missing.empty()) {
            what = "parameter(s) ";
            for (std::size_t i = 0; i < missing.size(); ++i) what += (i ? ", " : "") + missing[i];
            what += " lack annotations";
        }
        if (!fn.has_return_annotation) what += std::string(what.empty() ? "" : " and ") + "return type is not annotated";
        out.push_back(make_finding("REL-TYPE-MISSING-ANNOTATION", fn.span,
                                   "public function '" + fn.qualified_name + "': " + what));
    }

    // Literal assignments against scalar annotations, scope by scope.
    auto check_scope = [&](const Node& body, const Node* fn) {
        std::map<std::string, std::string> declared;
        if (fn)
            for (const auto& p : py::function_args(*fn).children)
                if (auto t = scalar_annotation(p->child(0)); !t.empty()) declared[p->text] = t;
        py::walk_scope(body, [&](const Node& n) {
            if (n.is(NodeKind::AnnAssign) && n.child(0)->is(NodeKind::Name))
                if (auto t = scalar_annotation(n.child(1)); !t.empty()) declared.emplace(n.child(0)->text, t);
        });
        if (declared.empty()) return;
        py::walk_scope(body, [&](const Node& n) {
            std::vector<const Node*> targets;
            const Node* value = nullptr;
            if (n.is(NodeKind::AnnAssign) && n.child(2)) {
                targets.push_back(n.child(0));
                value = n.child(2);
            } else if (n.is(NodeKind::Assign)) {
                for (std::size_t i = 0; i + 1 < n.size(); ++i) targets.push_back(n.child(i));
                value = n.children.back().get();
            }
            if (!value) return;
            const std::string lit = literal_type(*value);
            if (lit.empty() || lit == "None") return;
            for (const Node* t : targets) {
                if (!t->is(NodeKind::Name)) continue;
                auto it = declared.find(t->text);
                if (it == declared.end() || assignable(lit, it->second)) continue;
                out.push_back(make_finding("REL-TYPE-LITERAL-MISMATCH", unit.span_of(n),
                                           "'" + t->text + "' is declared " + it->second + " but assigned a " + lit +
                                               " literal"));
            }
        });
    };
    check_scope(module, nullptr);
    for (const auto& cls : unit.class_index()) check_scope(py::class_body(*cls.node), nullptr);
    for (const auto& fn : unit.function_index()) check_scope(py::function_body(*fn.node), fn.node);

    for (const auto& fn : unit.function_index()) {
        const std::string declared = scalar_annotation(py::function_returns(*fn.node));
        if (declared.empty()) continue;
        py::walk_scope(py::function_body(*fn.node), [&](const Node& n) {
            if (!n.is(NodeKind::Return) || !n.child(0)) return;
            const std::string lit = literal_type(*n.child(0));
            if (lit.empty() || assignable(lit, declared)) return;
            out.push_back(make_finding("REL-TYPE-RETURN-MISMATCH", unit.span_of(n),
                                       "'" + fn.qualified_name + "' is declared to return " + declared +
                                           " but returns a " + lit + " literal"));
        });
    }

    // Arity of calls to functions defined exactly once at module level and never rebound.
    std::map<std::string, int> bindings;
    py::walk(module, [&](const Node& n) {
        if (n.is(NodeKind::FunctionDef) || n.is(NodeKind::ClassDef)) ++bindings[n.text];
        if (n.is(NodeKind::Name) && n.ctx == py::ExprContext::Store) ++bindings[n.text];
        if (n.is(NodeKind::Param)) ++bindings[n.text];
        if (n.is(NodeKind::Alias)) {
            std::string local = n.text2.empty() ? n.text.substr(0, n.text.find('.')) : n.text2;
            ++bindings[local];
        }
        return true;
    });
    std::map<std::string, Signature> local_functions;
    for (const auto& stmt : module.children)
        if (stmt->is(NodeKind::FunctionDef) && py::function_decorators(*stmt).children.empty() &&
            bindings[stmt->text] == 1)
            local_functions.emplace(stmt->text, signature_of(*stmt));
    if (local_functions.empty()) return out;
    py::walk(module, [&](const Node& n) {
        if (!n.is(NodeKind::Call) || !n.child(0)->is(NodeKind::Name)) return true;
        auto it = local_functions.find(n.child(0)->text);
        if (it == local_functions.end()) return true;
        if (auto err = arity_error(n, it->second, it->first); !err.empty())
            out.push_back(make_finding("REL-TYPE-ARITY-MISMATCH", unit.span_of(n), err));
        return true;
    });
    return out;
}

}  // namespace codequal
