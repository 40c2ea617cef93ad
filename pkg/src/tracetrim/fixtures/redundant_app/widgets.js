// Widget measurements. The tally passes are bookkeeping only; the dot strip
// and the glyph row are visible, and sideSeq leaves a progress mark each
// time it runs.
function tally(v, i) {
  let t = v * 2 + i;
  return t;
}
function glyphRow(v, i) {
  paint(10 + i, 70, 200, 80, v % 200);
  return 0;
}
function buildCounts() {
  let xs = [];
  for (let i = 0; i < 8; i++) { xs.push(i * 3 + 1); }
  return xs;
}
function renderDots(vals) {
  for (let i = 0; i < vals.length; i++) { paint(10 + i, 80, 10, 10, vals[i] % 250); }
  return 0;
}
function sideSeq() {
  seqCalls = seqCalls + 1;
  paint(50 + seqCalls, 8, 220, 30, 30);
  return [3, 1, 4, 1, 5];
}
let seqCalls = 0;
let counts = buildCounts();
/*REDUNDANT*/ counts.forEach(tally);
let doubled = counts.map(tally);
renderDots(doubled);
sideSeq().forEach(glyphRow);
