#include "scfuzz/sc_builder.hpp"

namespace scfuzz {

namespace {

struct Builder {
    const TypeLattice& lattice;
    std::set<std::string>* seen_keys;  // null => originals only, no reverses
    BuildOutcome out{};
    std::set<std::string> bound_paths{};

    void bind(std::int64_t id, const ObjectPath& path) {
        auto it = out.sc.bindings.find(id);
        if (it != out.sc.bindings.end()) {
            // One object reachable through two paths (a shared element, a
            // canonical scalar): address matching keeps the first path.
            // Constraints stay sound because both paths resolve to the
            // same object.
            if (!(it->second == path)) ++out.duplicate_bindings;
            return;
        }
        if (!bound_paths.insert(path.text()).second) {
            // The path already answers to an earlier id; keep the first.
            ++out.duplicate_bindings;
            return;
        }
        out.sc.bindings.emplace(id, path);
    }

    void offer_reverse(StructureConstraint copy) {
        if (!seen_keys) return;
        copy.bindings.clear();
        if (!validate_constraint(copy, lattice)) {
            ++out.dropped_invalid;
            return;
        }
        std::string key = canonical_key(copy);
        if (!seen_keys->insert(key).second) return;
        out.reverse_keys.push_back(key);
        out.reverses.push_back(std::move(copy));
    }

    void apply_type_check(const ApiCallRecord& r, const ObjectPath& path) {
        ++out.rule_applications;
        if (!r.exact) {
            // Opposite branch first, from a copy of the constraint so far.
            StructureConstraint copy = out.sc;
            Quad& cq = copy.ensure_path(path);
            (r.result ? cq.t_nbt : cq.t_bt).insert(r.val_act);
            offer_reverse(std::move(copy));

            Quad& q = out.sc.ensure_path(path);
            (r.result ? q.t_bt : q.t_nbt).insert(r.val_act);
            return;
        }
        if (r.result) {
            // Exactly that type: two constraints land (the supertype and
            // the exact pin), and the other branch is either a proper
            // subtype or not a subtype at all.
            ++out.rule_applications;
            StructureConstraint sub = out.sc;
            Quad& sq = sub.ensure_path(path);
            sq.t_bt.insert(r.val_act);
            sq.forbidden_exact.insert(r.val_act);
            offer_reverse(std::move(sub));

            StructureConstraint non = out.sc;
            Quad& nq = non.ensure_path(path);
            nq.t_nbt.insert(r.val_act);
            offer_reverse(std::move(non));

            Quad& q = out.sc.ensure_path(path);
            q.t_bt.insert(r.val_act);
            q.exact_type = r.val_act;
        } else {
            // Not exactly that type; inheritance stays unconstrained.
            StructureConstraint copy = out.sc;
            Quad& cq = copy.ensure_path(path);
            cq.t_bt.insert(r.val_act);
            cq.exact_type = r.val_act;
            offer_reverse(std::move(copy));

            Quad& q = out.sc.ensure_path(path);
            q.forbidden_exact.insert(r.val_act);
        }
    }

    void apply_attr_get(const ApiCallRecord& r, const ObjectPath& path) {
        ++out.rule_applications;
        ObjectPath child = path.child(r.val_act);

        StructureConstraint copy = out.sc;
        Quad& cq = copy.ensure_path(path);
        if (r.ret) {
            cq.a_nbt.insert(r.val_act);
        } else {
            cq.a_bt.insert(r.val_act);
            copy.ensure_path(child);
        }
        offer_reverse(std::move(copy));

        Quad& q = out.sc.ensure_path(path);
        out.sc.ensure_path(child);
        if (r.ret) {
            q.a_bt.insert(r.val_act);
            bind(*r.ret, child);
        } else {
            q.a_nbt.insert(r.val_act);
        }
    }

    void run(const std::vector<ApiCallRecord>& trace,
             const std::vector<std::pair<std::string, std::int64_t>>& roots) {
        for (const auto& [name, id] : roots) {
            ObjectPath path{name, {}};
            out.sc.ensure_path(path);
            auto it = out.sc.bindings.find(id);
            if (it != out.sc.bindings.end()) {
                throw BuildError("root ids must be distinct");
            }
            bound_paths.insert(path.text());
            out.sc.bindings.emplace(id, path);
        }
        // The first pass covers the roots; extracted-attribute bindings
        // open records for later passes until a full pass adds nothing.
        std::vector<bool> consumed(trace.size(), false);
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t i = 0; i < trace.size(); ++i) {
                if (consumed[i]) continue;
                const ApiCallRecord& r = trace[i];
                auto it = out.sc.bindings.find(r.obj_id);
                if (it == out.sc.bindings.end()) continue;
                consumed[i] = true;
                progress = true;
                if (r.act == ApiCallRecord::Act::TypeCheck) {
                    apply_type_check(r, it->second);
                } else {
                    apply_attr_get(r, it->second);
                }
            }
        }
    }
};

}  // namespace

StructureConstraint build_sc(const std::vector<ApiCallRecord>& trace,
                             const std::vector<std::pair<std::string, std::int64_t>>& roots,
                             const TypeLattice& lattice) {
    Builder b{lattice, nullptr};
    b.run(trace, roots);
    return std::move(b.out.sc);
}

BuildOutcome build_with_reverses(const std::vector<ApiCallRecord>& trace,
                                 const std::vector<std::pair<std::string, std::int64_t>>& roots,
                                 std::set<std::string>& seen_keys, const TypeLattice& lattice) {
    Builder b{lattice, &seen_keys};
    b.run(trace, roots);
    return std::move(b.out);
}

}  // namespace scfuzz
