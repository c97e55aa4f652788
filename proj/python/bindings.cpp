#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agentcomm/error.hpp"
#include "agentcomm/scenario.hpp"

namespace py = pybind11;
using namespace agentcomm;
using nlohmann::json;

namespace {

// Python values cross the boundary as JSON text through the stdlib codec.
json to_json(const py::handle& obj) {
    auto dumps = py::module_::import("json").attr("dumps");
    return json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const json& j) {
    auto loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

py::list bindings_to_py(const std::vector<Binding>& rows) {
    py::list out;
    for (const auto& b : rows) {
        out.append(from_json(binding_to_json(b)));
    }
    return out;
}

std::vector<Pattern> patterns_from_py(const py::handle& obj) {
    std::vector<Pattern> out;
    for (const auto& p : to_json(obj)) {
        out.push_back(pattern_from_json(p));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Agent communication runtime: knowledge store, scenarios and trace tools";

    py::exception<Error>(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object type = py::module_::import("agentcomm._core").attr("Error");
            py::object exc = type(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    py::class_<KnowledgeStore>(m, "KnowledgeStore")
        .def(py::init<>())
        .def("add", [](KnowledgeStore& ks, const py::object& triple) {
            ks.assert_stmt(statement_from_json(to_json(triple)));
        }, py::arg("triple"), "Asserts one [subject, predicate, object] triple.")
        .def("remove", [](KnowledgeStore& ks, const py::object& triple) {
            return ks.retract_stmt(statement_from_json(to_json(triple)));
        }, py::arg("triple"))
        .def("__contains__", [](const KnowledgeStore& ks, const py::object& triple) {
            return ks.contains(statement_from_json(to_json(triple)));
        })
        .def("query", [](const KnowledgeStore& ks, const py::object& patterns) {
            return bindings_to_py(ks.query(patterns_from_py(patterns)));
        }, py::arg("patterns"), "Conjunctive query; returns one dict per solution, variables without '?'.")
        .def("is_subclass", [](const KnowledgeStore& ks, const std::string& sub, const std::string& super) {
            return ks.is_subclass(Term::symbol(sub), Term::symbol(super));
        })
        .def("load", &KnowledgeStore::load_file, py::arg("path"))
        .def("triples", [](const KnowledgeStore& ks) { return from_json(ks.to_json()); })
        .def("__len__", &KnowledgeStore::size);

    m.def("run_scenario", [](const std::filesystem::path& path) {
        auto result = run_scenario(path);
        py::dict out;
        out["exit_code"] = result.exit_code;
        out["trace"] = result.trace;
        out["summary"] = result.summary;
        out["report"] = from_json(result.report.to_json());
        return out;
    }, py::arg("path"));

    m.def("verify_trace", [](const std::string& actual, const std::string& golden) {
        auto diff = verify_trace(actual, golden);
        return py::make_tuple(diff.equal, diff.problems);
    }, py::arg("actual"), py::arg("golden"), "Returns (equal, problems).");

    m.def("evaluate_proposals", [](const py::dict& proposals, const std::string& direction) {
        std::vector<Proposal> ps;
        for (const auto& [agent, value] : proposals) {
            ps.push_back(Proposal{agent.cast<std::string>(), {{"value", term_from_json(to_json(value))}}});
        }
        return evaluate_proposals(ps, Objective::from_json(json{{"direction", direction}, {"variable", "value"}}));
    }, py::arg("proposals"), py::arg("direction") = "max",
       "Picks the best agent from {agent: value}; ties go to the smaller agent id.");

    m.def("lookup", [](const std::filesystem::path& scenario, const std::string& capability,
                       const std::vector<std::string>& outputs) {
        auto runtime = build_runtime(ScenarioConfig::load(scenario));
        return runtime->matchmaker().lookup(Term::symbol(capability), outputs);
    }, py::arg("scenario"), py::arg("capability"), py::arg("outputs") = std::vector<std::string>{});

    m.def("validate", [](const std::filesystem::path& dir) {
        return link(load_bundle(dir)).names();
    }, py::arg("dir"), "Loads and links a description directory; returns the description names.");
}
