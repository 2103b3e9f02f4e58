#include "nnbound/json_io.hpp"

#include <fstream>
#include <sstream>

#include "nnbound/network.hpp"

namespace nnbound {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double json_number(const nlohmann::json& j, const std::string& what) {
    if (!j.is_number())
        throw ParseError(what + " must be a number");
    return j.get<double>();
}

Eigen::VectorXd json_vector(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array())
        throw ParseError(what + " must be an array of numbers");
    Eigen::VectorXd v(Eigen::Index(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = json_number(j[i], what);
    return v;
}

nlohmann::json to_json_array(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace nnbound
