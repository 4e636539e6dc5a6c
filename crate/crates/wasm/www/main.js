import init, { blobScene, dragEdit, warpMagnitude } from "./pkg/dragwarp_wasm.js";

const W = 256;
const H = 256;
const BRUSH = 10;

const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");

let image = null;
let mask = new Uint8Array(W * H);
let drag = null;
let overlay = null;
let seed = 1;

function tool() {
  return document.querySelector("input[name=tool]:checked").value;
}

function toCell(ev) {
  const r = canvas.getBoundingClientRect();
  return [
    Math.floor(((ev.clientX - r.left) / r.width) * W),
    Math.floor(((ev.clientY - r.top) / r.height) * H),
  ];
}

function paint(x, y) {
  for (let dy = -BRUSH; dy <= BRUSH; dy++) {
    for (let dx = -BRUSH; dx <= BRUSH; dx++) {
      const px = x + dx;
      const py = y + dy;
      if (dx * dx + dy * dy <= BRUSH * BRUSH && px >= 0 && py >= 0 && px < W && py < H) {
        mask[py * W + px] = 1;
      }
    }
  }
}

function render() {
  const frame = new ImageData(new Uint8ClampedArray(image), W, H);
  const px = frame.data;
  let peak = 0;
  if (overlay) overlay.forEach((m) => { peak = Math.max(peak, m); });
  for (let i = 0; i < W * H; i++) {
    if (overlay && peak > 0) {
      const t = overlay[i] / peak;
      px[4 * i] = px[4 * i] * (1 - t) + 255 * t;
      px[4 * i + 2] = px[4 * i + 2] * (1 - t);
    } else if (mask[i]) {
      px[4 * i + 1] = Math.min(255, px[4 * i + 1] + 40);
    }
  }
  ctx.putImageData(frame, 0, 0);
  if (drag) {
    ctx.strokeStyle = "#f44";
    ctx.fillStyle = "#f44";
    ctx.beginPath();
    ctx.moveTo(drag.h[0] + 0.5, drag.h[1] + 0.5);
    ctx.lineTo(drag.t[0] + 0.5, drag.t[1] + 0.5);
    ctx.stroke();
    ctx.fillRect(drag.h[0] - 1, drag.h[1] - 1, 3, 3);
    ctx.strokeRect(drag.t[0] - 1.5, drag.t[1] - 1.5, 4, 4);
  }
}

function run(label, f) {
  try {
    const t0 = performance.now();
    f();
    status.textContent = `${label}: ${(performance.now() - t0).toFixed(1)} ms`;
  } catch (e) {
    status.textContent = `${label}: ${e.message ?? e}`;
  }
  render();
}

let pressed = false;
canvas.addEventListener("pointerdown", (ev) => {
  pressed = true;
  overlay = null;
  const [x, y] = toCell(ev);
  if (tool() === "mask") paint(x, y);
  else drag = { h: [x, y], t: [x, y] };
  render();
});
canvas.addEventListener("pointermove", (ev) => {
  if (!pressed) return;
  const [x, y] = toCell(ev);
  if (tool() === "mask") paint(x, y);
  else if (drag) drag.t = [x, y];
  render();
});
window.addEventListener("pointerup", () => { pressed = false; });

document.getElementById("scene").onclick = () => run("scene", () => {
  image = blobScene(W, H, seed++);
  overlay = null;
});
document.getElementById("clear").onclick = () => run("clear", () => {
  mask = new Uint8Array(W * H);
  overlay = null;
});
document.getElementById("field").onclick = () => run("warp field", () => {
  if (!drag) throw new Error("place a drag first");
  overlay = warpMagnitude(W, H, mask, drag.h[0], drag.h[1], drag.t[0], drag.t[1]);
});
document.getElementById("apply").onclick = () => run("edit", () => {
  if (!drag) throw new Error("place a drag first");
  const mode = document.getElementById("mode").value;
  image = dragEdit(image, W, H, mask, drag.h[0], drag.h[1], drag.t[0], drag.t[1], mode);
  drag = null;
  overlay = null;
});

await init();
image = blobScene(W, H, seed++);
render();
