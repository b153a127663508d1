#include "imcmap/models.hpp"

#include <cassert>

#include "imcmap/error.hpp"

namespace imcmap {

namespace {

// Incremental graph builder; node ids are assigned sequentially in emission
// order, which is always a valid topological order for these generators.
struct Builder {
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<int, int>> edges;
  int next_id = 1;

  int emit(NodeSpec n) {
    n.id = next_id++;
    nodes.push_back(std::move(n));
    return nodes.back().id;
  }

  // Convolution with dimensions K x K x Cin x Cout producing Hout x Wout.
  int conv(const std::string& name, std::int64_t cin, std::int64_t cout, std::int64_t k,
           std::int64_t hout, std::int64_t wout, std::optional<FusedAct> act, int input = 0) {
    NodeSpec n;
    n.name = name;
    n.op = OpKind::Conv;
    n.fused_activation = act;
    n.macs = k * k * cin * cout * hout * wout;
    n.weight_count = k * k * cin * cout + cout;
    n.out_elems = hout * wout * cout;
    int id = emit(std::move(n));
    if (input) edge(input, id);
    return id;
  }

  // Dense layer as a matrix-vector product.
  int mvm(const std::string& name, std::int64_t cin, std::int64_t cout, int input = 0) {
    NodeSpec n;
    n.name = name;
    n.op = OpKind::Mvm;
    n.macs = cin * cout;
    n.weight_count = cin * cout + cout;
    n.out_elems = cout;
    int id = emit(std::move(n));
    if (input) edge(input, id);
    return id;
  }

  int op(const std::string& name, OpKind kind, std::int64_t out_elems,
         std::initializer_list<int> inputs = {}) {
    NodeSpec n;
    n.name = name;
    n.op = kind;
    n.out_elems = out_elems;
    int id = emit(std::move(n));
    for (int in : inputs) edge(in, id);
    return id;
  }

  void edge(int from, int to) { edges.emplace_back(from, to); }

  ModelGraph build(const std::string& model_name) {
    return ModelGraph::build(model_name, std::move(nodes), std::move(edges));
  }
};

// CIFAR-10 ResNet-8: 3x3 stem at 16 channels, three residual stacks
// (16 -> 32 -> 64, the last two with stride 2 and a 1x1 projection
// shortcut), global average pool and a 10-way dense classifier. 14 nodes:
// 9 convolutions + the classifier on the IMC side, 3 adds + 1 pool on the
// DPU side; 77,706 parameters.
ModelGraph make_resnet8() {
  Builder b;
  const auto relu = FusedAct::ReLU;

  int stem = b.conv("conv1", 3, 16, 3, 32, 32, relu);

  int c2 = b.conv("stack1.conv1", 16, 16, 3, 32, 32, relu, stem);
  int c3 = b.conv("stack1.conv2", 16, 16, 3, 32, 32, std::nullopt, c2);
  int a1 = b.op("stack1.add", OpKind::Add, 32 * 32 * 16, {stem, c3});

  int c5 = b.conv("stack2.conv1", 16, 32, 3, 16, 16, relu, a1);
  int c6 = b.conv("stack2.conv2", 32, 32, 3, 16, 16, std::nullopt, c5);
  int c7 = b.conv("stack2.shortcut", 16, 32, 1, 16, 16, std::nullopt, a1);
  int a2 = b.op("stack2.add", OpKind::Add, 16 * 16 * 32, {c6, c7});

  int c9 = b.conv("stack3.conv1", 32, 64, 3, 8, 8, relu, a2);
  int c10 = b.conv("stack3.conv2", 64, 64, 3, 8, 8, std::nullopt, c9);
  int c11 = b.conv("stack3.shortcut", 32, 64, 1, 8, 8, std::nullopt, a2);
  int a3 = b.op("stack3.add", OpKind::Add, 8 * 8 * 64, {c10, c11});

  int pool = b.op("avgpool", OpKind::AvgPool, 64, {a3});
  b.mvm("fc", 64, 10, pool);

  return b.build("resnet8");
}

// ResNet-18 adapted to 32x32 inputs: 3x3 stem (no max pool), widths halved
// to 32/64/128/256 to land at 2.8M parameters, four stages of two basic
// blocks each, 1x1 projection shortcuts on the stride-2 stages. 30 nodes:
// 20 convolutions + 1 dense classifier (IMC class, ids 1,2,3,5,6,8,9,10,
// 12,13,15,16,17,19,20,22,23,24,26,27,30), 8 adds + 1 pool (DPU class).
ModelGraph make_resnet18() {
  Builder b;
  const auto relu = FusedAct::ReLU;

  // stage parameters: channels, spatial size, input comes from `prev`
  int stem = b.conv("conv1", 3, 32, 3, 32, 32, relu);  // id 1

  // layer1: 32 channels at 32x32, identity shortcuts
  int c2 = b.conv("layer1.0.conv1", 32, 32, 3, 32, 32, relu, stem);
  int c3 = b.conv("layer1.0.conv2", 32, 32, 3, 32, 32, relu, c2);
  int a4 = b.op("layer1.0.add", OpKind::Add, 32 * 32 * 32, {stem, c3});
  int c5 = b.conv("layer1.1.conv1", 32, 32, 3, 32, 32, relu, a4);
  int c6 = b.conv("layer1.1.conv2", 32, 32, 3, 32, 32, relu, c5);
  int a7 = b.op("layer1.1.add", OpKind::Add, 32 * 32 * 32, {a4, c6});

  // layer2: 64 channels at 16x16, projection shortcut in block 0
  int c8 = b.conv("layer2.0.conv1", 32, 64, 3, 16, 16, relu, a7);
  int c9 = b.conv("layer2.0.conv2", 64, 64, 3, 16, 16, std::nullopt, c8);
  int c10 = b.conv("layer2.0.shortcut", 32, 64, 1, 16, 16, std::nullopt, a7);
  int a11 = b.op("layer2.0.add", OpKind::Add, 16 * 16 * 64, {c9, c10});
  int c12 = b.conv("layer2.1.conv1", 64, 64, 3, 16, 16, relu, a11);
  int c13 = b.conv("layer2.1.conv2", 64, 64, 3, 16, 16, std::nullopt, c12);
  int a14 = b.op("layer2.1.add", OpKind::Add, 16 * 16 * 64, {a11, c13});

  // layer3: 128 channels at 8x8
  int c15 = b.conv("layer3.0.conv1", 64, 128, 3, 8, 8, relu, a14);
  int c16 = b.conv("layer3.0.conv2", 128, 128, 3, 8, 8, std::nullopt, c15);
  int c17 = b.conv("layer3.0.shortcut", 64, 128, 1, 8, 8, std::nullopt, a14);
  int a18 = b.op("layer3.0.add", OpKind::Add, 8 * 8 * 128, {c16, c17});
  int c19 = b.conv("layer3.1.conv1", 128, 128, 3, 8, 8, relu, a18);
  int c20 = b.conv("layer3.1.conv2", 128, 128, 3, 8, 8, std::nullopt, c19);
  int a21 = b.op("layer3.1.add", OpKind::Add, 8 * 8 * 128, {a18, c20});

  // layer4: 256 channels at 4x4
  int c22 = b.conv("layer4.0.conv1", 128, 256, 3, 4, 4, relu, a21);
  int c23 = b.conv("layer4.0.conv2", 256, 256, 3, 4, 4, std::nullopt, c22);
  int c24 = b.conv("layer4.0.shortcut", 128, 256, 1, 4, 4, std::nullopt, a21);
  int a25 = b.op("layer4.0.add", OpKind::Add, 4 * 4 * 256, {c23, c24});
  int c26 = b.conv("layer4.1.conv1", 256, 256, 3, 4, 4, relu, a25);
  int c27 = b.conv("layer4.1.conv2", 256, 256, 3, 4, 4, std::nullopt, c26);
  int a28 = b.op("layer4.1.add", OpKind::Add, 4 * 4 * 256, {a25, c27});

  int pool = b.op("avgpool", OpKind::AvgPool, 256, {a28});
  b.mvm("fc", 256, 10, pool);

  return b.build("resnet18");
}

// YOLOv8n-style detection graph, clipped and approximated to the published
// shape of the evaluated subset: a sequential backbone of four stage
// convolutions with single-bottleneck C2f blocks, an SPPF block, a two-step
// upsampling neck, and three parallel detection branches. Every branch
// carries two 3-conv heads (box and class, plain final 1x1) plus one 5-conv
// auxiliary head, followed by an elementwise decode chain; a shared tail
// merges the three scales. 233 nodes, 63 convolutions (57 with fused SiLU),
// 3,166,656 parameters at 160x160 input.
ModelGraph make_yolov8n_subset() {
  Builder b;
  const auto silu = FusedAct::SiLU;

  // C2f block with one bottleneck: cv1 -> split -> two 3x3 convs on the
  // hidden half (-> add when shortcut) -> concat -> cv2.
  auto c2f = [&](const std::string& tag, int input, std::int64_t cin, std::int64_t c,
                 std::int64_t hw_side, bool shortcut) {
    std::int64_t h = hw_side, w = hw_side, half = c / 2;
    int cv1 = b.conv(tag + ".cv1", cin, c, 1, h, w, silu, input);
    int split = b.op(tag + ".split", OpKind::Split, h * w * c, {cv1});
    int m1 = b.conv(tag + ".m.conv1", half, half, 3, h, w, silu, split);
    int m2 = b.conv(tag + ".m.conv2", half, half, 3, h, w, silu, m1);
    int tail = m2;
    if (shortcut) tail = b.op(tag + ".m.add", OpKind::Add, h * w * half, {split, m2});
    int cat = b.op(tag + ".concat", OpKind::Concat, h * w * (c + half), {split, tail});
    return b.conv(tag + ".cv2", c + half, c, 1, h, w, silu, cat);
  };

  // backbone: 160x160 input, stages P2..P5
  int s1 = b.conv("backbone.stage1", 3, 32, 3, 80, 80, silu);
  int p2 = c2f("backbone.c2f_p2", s1, 32, 32, 80, true);
  int s2 = b.conv("backbone.stage2", 32, 64, 3, 40, 40, silu, p2);
  int p3 = c2f("backbone.c2f_p3", s2, 64, 64, 40, true);
  int s3 = b.conv("backbone.stage3", 64, 128, 3, 20, 20, silu, p3);
  int p4 = c2f("backbone.c2f_p4", s3, 128, 128, 20, true);
  int s4 = b.conv("backbone.stage4", 128, 256, 3, 10, 10, silu, p4);
  int p5 = c2f("backbone.c2f_p5", s4, 256, 256, 10, true);

  // SPPF: 1x1 reduce, three chained max pools, concat, 1x1 expand
  int sp1 = b.conv("sppf.cv1", 256, 128, 1, 10, 10, silu, p5);
  int mp1 = b.op("sppf.pool1", OpKind::MaxPool, 10 * 10 * 128, {sp1});
  int mp2 = b.op("sppf.pool2", OpKind::MaxPool, 10 * 10 * 128, {mp1});
  int mp3 = b.op("sppf.pool3", OpKind::MaxPool, 10 * 10 * 128, {mp2});
  int spc = b.op("sppf.concat", OpKind::Concat, 10 * 10 * 512, {sp1, mp1, mp2, mp3});
  int sppf = b.conv("sppf.cv2", 512, 256, 1, 10, 10, silu, spc);

  // neck: upsample P5 -> fuse with P4, upsample again -> fuse with P3
  int up1 = b.op("neck.up1", OpKind::Reshape, 20 * 20 * 256, {sppf});
  int cat1 = b.op("neck.cat1", OpKind::Concat, 20 * 20 * 384, {up1, p4});
  int n1 = c2f("neck.c2f_n1", cat1, 384, 128, 20, false);  // P4 fused, 20x20x128
  int up2 = b.op("neck.up2", OpKind::Reshape, 40 * 40 * 128, {n1});
  int cat2 = b.op("neck.cat2", OpKind::Concat, 40 * 40 * 192, {up2, p3});
  int n2 = c2f("neck.c2f_n2", cat2, 192, 64, 40, false);  // P3 fused, 40x40x64

  // Detection branch rooted at `input` (channels c, side hw, aux width ah).
  // Two 3-conv heads (plain final 1x1) and one 5-conv auxiliary head merge
  // into a per-scale decode chain; returns the branch output node.
  auto branch = [&](const std::string& t, int input, std::int64_t c, std::int64_t hw,
                    std::int64_t ah) {
    const std::int64_t anchors = hw * hw;
    int b1 = b.conv(t + ".box.conv1", c, 64, 3, hw, hw, silu, input);
    int b2 = b.conv(t + ".box.conv2", 64, 64, 3, hw, hw, silu, b1);
    int b3 = b.conv(t + ".box.conv3", 64, 64, 1, hw, hw, std::nullopt, b2);
    int l1 = b.conv(t + ".cls.conv1", c, 80, 3, hw, hw, silu, input);
    int l2 = b.conv(t + ".cls.conv2", 80, 80, 3, hw, hw, silu, l1);
    int l3 = b.conv(t + ".cls.conv3", 80, 80, 1, hw, hw, std::nullopt, l2);
    int a1 = b.conv(t + ".aux.conv1", c, ah, 3, hw, hw, silu, input);
    int a2 = b.conv(t + ".aux.conv2", ah, ah, 3, hw, hw, silu, a1);
    int a3 = b.conv(t + ".aux.conv3", ah, ah, 3, hw, hw, silu, a2);
    int a4 = b.conv(t + ".aux.conv4", ah, ah, 3, hw, hw, silu, a3);
    int a5 = b.conv(t + ".aux.conv5", ah, ah, 1, hw, hw, silu, a4);
    int merge =
        b.op(t + ".merge", OpKind::Concat, anchors * (64 + 80 + ah), {b3, l3, a5});

    // decode: flatten, split box/class/aux, distribution-focal expectation
    // on the box path, grid add, distance-to-box arithmetic, per-group
    // class score pooling, auxiliary quality gate.
    int flat = b.op(t + ".dec.flatten", OpKind::Reshape, anchors * (144 + ah), {merge});
    int hsplit = b.op(t + ".dec.split", OpKind::Split, anchors * (144 + ah), {flat});
    int dv = b.op(t + ".dfl.view", OpKind::Reshape, anchors * 64, {hsplit});
    int dp = b.op(t + ".dfl.perm", OpKind::Reshape, anchors * 64, {dv});
    int ds = b.op(t + ".dfl.softmax", OpKind::Activation, anchors * 64, {dp});
    int de = b.op(t + ".dfl.expect", OpKind::AvgPool, anchors * 4, {ds});
    int df = b.op(t + ".dfl.flatten", OpKind::Reshape, anchors * 4, {de});
    int gv = b.op(t + ".grid.view", OpKind::Reshape, anchors * 2, {flat});
    int gx = b.op(t + ".grid.xs", OpKind::Reshape, anchors, {gv});
    int gy = b.op(t + ".grid.ys", OpKind::Reshape, anchors, {gv});
    int gc = b.op(t + ".grid.concat", OpKind::Concat, anchors * 2, {gx, gy});
    int ls = b.op(t + ".d2b.split", OpKind::Split, anchors * 4, {df});
    int lt = b.op(t + ".d2b.lt_add", OpKind::Add, anchors * 2, {ls, gc});
    int rb = b.op(t + ".d2b.rb_add", OpKind::Add, anchors * 2, {ls, gc});
    int ctr = b.op(t + ".d2b.ctr_add", OpKind::Add, anchors * 2, {lt, rb});
    int ch = b.op(t + ".d2b.ctr_half", OpKind::Activation, anchors * 2, {ctr});
    int wh = b.op(t + ".d2b.wh_add", OpKind::Add, anchors * 2, {lt, rb});
    int bc = b.op(t + ".d2b.concat", OpKind::Concat, anchors * 4, {ch, wh});
    int st = b.op(t + ".d2b.stride_scale", OpKind::Activation, anchors * 4, {bc});
    int bf = b.op(t + ".box.flatten", OpKind::Reshape, anchors * 4, {st});
    int cs = b.op(t + ".cls.sigmoid", OpKind::Activation, anchors * 80, {hsplit});
    int cf = b.op(t + ".cls.flatten", OpKind::Reshape, anchors * 80, {cs});
    std::vector<int> groups;
    for (int gidx = 0; gidx < 8; ++gidx)
      groups.push_back(b.op(t + ".cls.groupmax" + std::to_string(gidx), OpKind::MaxPool,
                            anchors, {cs}));
    int gcat = b.op(t + ".cls.group_concat", OpKind::Concat, anchors * 8, {});
    for (int gid : groups) b.edge(gid, gcat);
    int om = b.op(t + ".cls.objmax", OpKind::MaxPool, anchors, {gcat});
    int ap = b.op(t + ".aux.pool", OpKind::AvgPool, ah, {hsplit});
    int aa = b.op(t + ".aux.act", OpKind::Activation, ah, {ap});
    int af = b.op(t + ".aux.flatten", OpKind::Reshape, ah, {aa});
    int ga = b.op(t + ".gate.add", OpKind::Add, anchors, {om, af});
    int gact = b.op(t + ".gate.act", OpKind::Activation, anchors, {ga});
    int oc = b.op(t + ".out.concat", OpKind::Concat, anchors * 84, {bf, cf});
    int og = b.op(t + ".out.gate", OpKind::Add, anchors * 84, {oc, gact});
    return b.op(t + ".out.flatten", OpKind::Reshape, anchors * 84, {og});
  };

  int o3 = branch("head.p3", n2, 64, 40, 32);
  int o4 = branch("head.p4", n1, 128, 20, 48);
  int o5 = branch("head.p5", sppf, 256, 10, 128);

  // shared tail: merge the three scales, split boxes from scores, rescale
  // and gate detections, cap the final output
  const std::int64_t all = 84 * (1600 + 400 + 100);
  const std::int64_t na = 1600 + 400 + 100;
  int tc = b.op("tail.concat", OpKind::Concat, all, {o3, o4, o5});
  int ts = b.op("tail.split", OpKind::Split, all, {tc});
  int bb = b.op("tail.box.view", OpKind::Reshape, na * 4, {ts});
  int sa = b.op("tail.score.view", OpKind::Reshape, na * 80, {ts});
  int stp = b.op("tail.score.max", OpKind::MaxPool, na, {sa});
  int ssg = b.op("tail.score.act", OpKind::Activation, na * 80, {sa});
  int kg = b.op("tail.keep.gate", OpKind::Add, na, {stp, ssg});
  int ka = b.op("tail.keep.act", OpKind::Activation, na, {kg});
  int bxs = b.op("tail.box.split", OpKind::Split, na * 4, {bb});
  int xv = b.op("tail.box.xy_view", OpKind::Reshape, na * 2, {bxs});
  int wv = b.op("tail.box.wh_view", OpKind::Reshape, na * 2, {bxs});
  int xs = b.op("tail.box.xy_scale", OpKind::Activation, na * 2, {xv});
  int ws = b.op("tail.box.wh_scale", OpKind::Activation, na * 2, {wv});
  int br = b.op("tail.box.rescaled", OpKind::Concat, na * 4, {xs, ws});
  int bk = b.op("tail.box.kept", OpKind::Add, na * 4, {br, ka});
  int bs = b.op("tail.box.sorted", OpKind::Reshape, na * 4, {bk});
  int sk = b.op("tail.score.kept", OpKind::Add, na, {ssg, ka});
  int ss = b.op("tail.score.sorted", OpKind::Reshape, na, {sk});
  int dc = b.op("tail.det.concat", OpKind::Concat, na * 5, {bs, ss});
  int dt = b.op("tail.det.cap", OpKind::MaxPool, 300 * 5, {dc});
  int da = b.op("tail.det.act", OpKind::Activation, 300 * 5, {dt});
  int dvw = b.op("tail.det.view", OpKind::Reshape, 300 * 5, {da});
  b.op("tail.output", OpKind::Reshape, 300 * 5, {dvw});

  ModelGraph g = b.build("yolov8n_subset");
  assert(g.node_count() == 233);
  return g;
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  return {"resnet8", "resnet18", "yolov8n_subset"};
}

bool is_builtin_model(const std::string& name) {
  for (const std::string& n : builtin_model_names())
    if (n == name) return true;
  return false;
}

ModelGraph builtin_model(const std::string& name) {
  if (name == "resnet8") return make_resnet8();
  if (name == "resnet18") return make_resnet18();
  if (name == "yolov8n_subset") return make_yolov8n_subset();
  throw ConfigError("unknown builtin model '" + name +
                    "' (expected resnet8, resnet18 or yolov8n_subset)");
}

}  // namespace imcmap
