import init, { ground_state, reconstruct_gaussian, compress_quantics } from "./pkg/ttnet_web.js";

const SVG = "http://www.w3.org/2000/svg";
const PALETTE = ["#c0392b", "#2471a3", "#229954", "#b9770e", "#7d3c98"];

function el(name, attrs, parent) {
  const e = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  parent.appendChild(e);
  return e;
}

// Radial layout: every site gets an equal slice of angle, tensors sit at the mean angle of
// their sites, radius grows with distance from the center bond.
function drawTree(tree, colorOf, size = 320) {
  const adj = new Map();
  const link = (a, b, bond) => {
    if (!adj.has(a)) adj.set(a, []);
    adj.get(a).push([b, bond]);
  };
  for (const b of tree.bonds) {
    link(b.nodes[0], b.nodes[1], b);
    link(b.nodes[1], b.nodes[0], b);
  }
  const root = tree.bonds[tree.center].nodes;
  const depth = new Map([[root[0], 1], [root[1], 1]]);
  const parent = new Map();
  const order = [root[0], root[1]];
  for (let i = 0; i < order.length; i++) {
    for (const [w] of adj.get(order[i]) ?? []) {
      if (!depth.has(w)) {
        depth.set(w, depth.get(order[i]) + 1);
        parent.set(w, order[i]);
        order.push(w);
      }
    }
  }
  const maxDepth = Math.max(...depth.values());
  const sites = order.filter((v) => v < tree.sites);
  const angle = new Map(sites.map((s, k) => [s, (2 * Math.PI * k) / sites.length]));
  for (const v of [...order].reverse()) {
    if (v < tree.sites) continue;
    const kids = (adj.get(v) ?? []).map(([w]) => w).filter((w) => parent.get(w) === v);
    const xs = kids.map((w) => Math.cos(angle.get(w))).reduce((a, b) => a + b, 0);
    const ys = kids.map((w) => Math.sin(angle.get(w))).reduce((a, b) => a + b, 0);
    angle.set(v, Math.atan2(ys, xs));
  }
  const r = size / 2 - 18;
  const pos = (v) => {
    const rad = v < tree.sites ? r : (r * (depth.get(v) - 1)) / maxDepth;
    return [size / 2 + rad * Math.cos(angle.get(v)), size / 2 + rad * Math.sin(angle.get(v))];
  };
  const svg = document.createElementNS(SVG, "svg");
  svg.setAttribute("width", size);
  svg.setAttribute("height", size);
  for (const b of tree.bonds) {
    const [a, c] = b.nodes.map(pos);
    const line = el("line", { x1: a[0], y1: a[1], x2: c[0], y2: c[1], stroke: b.bond === tree.center ? "#e67e22" : "#333", "stroke-width": 1 + 6 * b.entropy }, svg);
    el("title", {}, line).textContent = `bond ${b.bond}: S = ${b.entropy.toFixed(4)}, dim ${b.dim}`;
  }
  for (const v of order) {
    const [x, y] = pos(v);
    if (v < tree.sites) {
      el("circle", { cx: x, cy: y, r: 6, fill: colorOf(v) }, svg);
      const t = el("text", { x, y: y + 3, "font-size": 8, "text-anchor": "middle", fill: "#fff" }, svg);
      t.textContent = v;
    } else {
      el("circle", { cx: x, cy: y, r: 3, fill: "#333" }, svg);
    }
  }
  return svg;
}

function figure(tree, caption, colorOf = () => "#888") {
  const f = document.createElement("figure");
  f.appendChild(drawTree(tree, colorOf));
  const c = document.createElement("figcaption");
  c.textContent = caption;
  f.appendChild(c);
  return f;
}

const fmt = (x, d = 4) => Number(x).toFixed(d);

function show(section, build) {
  const out = section.querySelector(".out");
  out.replaceChildren();
  try {
    const nodes = build();
    const row = document.createElement("div");
    row.className = "pair";
    for (const n of nodes) row.appendChild(n);
    out.appendChild(row);
  } catch (e) {
    const p = document.createElement("p");
    p.className = "error";
    p.textContent = e.message;
    out.appendChild(p);
  }
}

function call(fn, form) {
  const req = {};
  for (const [k, v] of new FormData(form)) req[k] = Number(v);
  const res = JSON.parse(fn(JSON.stringify(req)));
  if (res.error) throw new Error(res.error);
  return res;
}

const handlers = {
  gss(form) {
    const r = call(ground_state, form);
    const text = `E = ${fmt(r.energy, 10)} after ${r.sweeps} sweeps${r.converged ? "" : " (limit)"}; ` +
      `aux EE max ${fmt(r.max_aux_entropy)}, mean ${fmt(r.mean_aux_entropy)}`;
    return [figure(r, text)];
  },
  normal(form) {
    const r = call(reconstruct_gaussian, form);
    const color = (v) => PALETTE[v];
    return [
      figure(r.before, `chain: mean aux EE ${fmt(r.before.mean_aux_entropy, 6)}`, color),
      figure(r.after, `after ${r.sweeps} sweeps: mean aux EE ${fmt(r.after.mean_aux_entropy, 6)}`, color),
    ];
  },
  quantics(form) {
    const r = call(compress_quantics, form);
    const color = (v) => PALETTE[Math.floor(v / r.legs_per_variable)];
    return [
      figure(r.chain, `fixed chain: F ${fmt(r.chain.fidelity, 5)}, mean aux EE ${fmt(r.chain.mean_aux_entropy)}`, color),
      figure(r.tree, `optimized tree: F ${fmt(r.tree.fidelity, 5)}, mean aux EE ${fmt(r.tree.mean_aux_entropy)}`, color),
    ];
  },
};

await init();
for (const [id, handler] of Object.entries(handlers)) {
  const form = document.getElementById(id);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    show(form.parentElement, () => handler(form));
  });
  show(form.parentElement, () => handler(form));
}
