#include "seqcert/serialize.hpp"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "seqcert/errors.hpp"

namespace seqcert {

namespace {

using json = nlohmann::ordered_json;

std::vector<float> read_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("load_model: cannot open weight blob " + path);
    std::streamsize bytes = in.tellg();
    if (bytes % 4 != 0) throw ParseError("load_model: blob size is not a multiple of 4");
    in.seekg(0);
    std::vector<float> blob(static_cast<std::size_t>(bytes / 4));
    if (bytes && !in.read(reinterpret_cast<char*>(blob.data()), bytes))
        throw IoError("load_model: failed reading blob " + path);
    return blob;
}

std::string crc32_hex(const std::vector<float>& blob) {
    uLong crc = crc32(0L, Z_NULL, 0);
    if (!blob.empty())
        crc = crc32(crc, reinterpret_cast<const Bytef*>(blob.data()),
                    static_cast<uInt>(blob.size() * sizeof(float)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

Tensor tensor_from_ref(const json& ref, const std::vector<float>& blob, const std::string& ctx) {
    if (!ref.contains("offset") || !ref.contains("dims"))
        throw ParseError("load_model: tensor ref needs offset+dims (" + ctx + ")");
    std::size_t off = ref.at("offset").get<std::size_t>();
    std::vector<std::uint32_t> dims = ref.at("dims").get<std::vector<std::uint32_t>>();
    std::size_t n = Tensor::count(dims);
    if (off + n > blob.size())
        throw ParseError("load_model: tensor ref past end of blob (" + ctx + ")");
    Tensor t;
    t.dims = std::move(dims);
    t.data.assign(blob.begin() + static_cast<std::ptrdiff_t>(off),
                  blob.begin() + static_cast<std::ptrdiff_t>(off + n));
    return t;
}

json tensor_to_ref(const Tensor& t, std::vector<float>& blob) {
    json ref;
    ref["offset"] = blob.size();
    ref["dims"] = t.dims;
    blob.insert(blob.end(), t.data.begin(), t.data.end());
    return ref;
}

void parse_attn(const json& j, const std::vector<float>& blob, Network& net) {
    AttnDecoderParams a;
    a.hidden = j.at("hidden").get<int>();
    a.att_dim = j.at("att_dim").get<int>();
    a.feat = j.at("feat").get<int>();
    a.classes = j.at("classes").get<int>();
    a.max_steps = j.at("max_steps").get<int>();
    const json& ts = j.at("tensors");
    a.W = tensor_from_ref(ts.at("W"), blob, "attn.W");
    a.V = tensor_from_ref(ts.at("V"), blob, "attn.V");
    a.b = tensor_from_ref(ts.at("b"), blob, "attn.b");
    a.a = tensor_from_ref(ts.at("a"), blob, "attn.a");
    a.Wlstm = tensor_from_ref(ts.at("Wlstm"), blob, "attn.Wlstm");
    a.blstm = tensor_from_ref(ts.at("blstm"), blob, "attn.blstm");
    a.W0 = tensor_from_ref(ts.at("W0"), blob, "attn.W0");
    a.b0 = tensor_from_ref(ts.at("b0"), blob, "attn.b0");
    net.attn = std::move(a);
}

}  // namespace

Network load_model(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("load_model: cannot open manifest " + manifest_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(std::string("load_model: manifest is not valid JSON: ") + e.what());
    }

    namespace fs = std::filesystem;
    fs::path base = fs::path(manifest_path).parent_path();
    std::string blob_rel = j.at("weights").get<std::string>();
    std::vector<float> blob = read_blob((base / blob_rel).string());

    if (j.contains("weights_crc32")) {
        std::string want = j.at("weights_crc32").get<std::string>();
        std::string got = crc32_hex(blob);
        if (want != got)
            throw ParseError("load_model: weight blob checksum mismatch (manifest " + want +
                             ", blob " + got + ")");
    }

    Network net;
    net.decoder = decoder_from_name(j.at("decoder").get<std::string>());
    net.output = j.at("output").get<std::string>();
    net.frames = j.at("frames").get<int>();

    const json& cls = j.at("classes");
    net.meta.classes = cls.at("count").get<int>();
    net.meta.blank = cls.value("blank", 0);
    net.meta.go = cls.value("go", -1);
    net.meta.eos = cls.value("eos", -1);
    if (cls.contains("alphabet"))
        net.meta.alphabet = cls.at("alphabet").get<std::vector<std::string>>();

    for (const json& nj : j.at("nodes")) {
        Node n;
        n.id = nj.at("id").get<std::string>();
        n.kind = kind_from_name(nj.at("kind").get<std::string>());
        if (nj.contains("inputs")) n.inputs = nj.at("inputs").get<std::vector<std::string>>();
        if (nj.contains("ints"))
            for (auto& [k, v] : nj.at("ints").items()) n.ints[k] = v.get<std::int64_t>();
        if (nj.contains("floats"))
            for (auto& [k, v] : nj.at("floats").items()) n.floats[k] = v.get<double>();
        if (nj.contains("intlists"))
            for (auto& [k, v] : nj.at("intlists").items())
                n.intlists[k] = v.get<std::vector<std::int64_t>>();
        if (nj.contains("tensors"))
            for (auto& [k, v] : nj.at("tensors").items())
                n.tensors[k] = tensor_from_ref(v, blob, n.id + "." + k);
        if (n.kind == NodeKind::Input)
            n.out_dims = nj.at("dims").get<std::vector<std::uint32_t>>();
        net.nodes.push_back(std::move(n));
    }

    if (j.contains("attn_decoder")) parse_attn(j.at("attn_decoder"), blob, net);

    validate(net);
    return net;
}

void save_model(const Network& net, const std::string& manifest_path,
                const std::string& weights_path) {
    std::vector<float> blob;
    json j;
    j["format"] = 1;
    j["decoder"] = decoder_name(net.decoder);
    j["output"] = net.output;
    j["frames"] = net.frames;
    json cls;
    cls["count"] = net.meta.classes;
    cls["blank"] = net.meta.blank;
    cls["go"] = net.meta.go;
    cls["eos"] = net.meta.eos;
    if (!net.meta.alphabet.empty()) cls["alphabet"] = net.meta.alphabet;
    j["classes"] = cls;

    json nodes = json::array();
    for (const Node& n : net.nodes) {
        json nj;
        nj["id"] = n.id;
        nj["kind"] = kind_name(n.kind);
        if (n.kind == NodeKind::Input) nj["dims"] = n.out_dims;
        if (!n.inputs.empty()) nj["inputs"] = n.inputs;
        if (!n.ints.empty()) nj["ints"] = n.ints;
        if (!n.floats.empty()) nj["floats"] = n.floats;
        if (!n.intlists.empty()) nj["intlists"] = n.intlists;
        if (!n.tensors.empty()) {
            json ts;
            for (const auto& [k, t] : n.tensors) ts[k] = tensor_to_ref(t, blob);
            nj["tensors"] = ts;
        }
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);

    if (net.attn) {
        const auto& a = *net.attn;
        json aj;
        aj["hidden"] = a.hidden;
        aj["att_dim"] = a.att_dim;
        aj["feat"] = a.feat;
        aj["classes"] = a.classes;
        aj["max_steps"] = a.max_steps;
        json ts;
        ts["W"] = tensor_to_ref(a.W, blob);
        ts["V"] = tensor_to_ref(a.V, blob);
        ts["b"] = tensor_to_ref(a.b, blob);
        ts["a"] = tensor_to_ref(a.a, blob);
        ts["Wlstm"] = tensor_to_ref(a.Wlstm, blob);
        ts["blstm"] = tensor_to_ref(a.blstm, blob);
        ts["W0"] = tensor_to_ref(a.W0, blob);
        ts["b0"] = tensor_to_ref(a.b0, blob);
        aj["tensors"] = std::move(ts);
        j["attn_decoder"] = std::move(aj);
    }

    namespace fs = std::filesystem;
    fs::path wp(weights_path);
    j["weights"] = wp.filename().string();
    j["weights_crc32"] = crc32_hex(blob);

    std::ofstream wout(weights_path, std::ios::binary | std::ios::trunc);
    if (!wout) throw IoError("save_model: cannot open " + weights_path);
    if (!blob.empty())
        wout.write(reinterpret_cast<const char*>(blob.data()),
                   static_cast<std::streamsize>(blob.size() * sizeof(float)));
    if (!wout) throw IoError("save_model: blob write failed");

    std::ofstream mout(manifest_path, std::ios::trunc);
    if (!mout) throw IoError("save_model: cannot open " + manifest_path);
    mout << j.dump(1) << "\n";
    if (!mout) throw IoError("save_model: manifest write failed");
}

}  // namespace seqcert
