// Layered warm-up passes. Every stage feeds the next, so the call chain is
// deep, but nothing here touches the screen: the page looks the same with
// the whole pipeline gone.
function stageJ(n) {
  let acc = 0;
  for (let i = 0; i < 4; i++) { acc = acc + n + i; }
  return acc;
}
function stageI(n) { return stageJ(n) + 1; }
function stageH(n) { return stageI(n) + 1; }
function stageG(n) { return stageH(n) + 1; }
function stageF(n) { return stageG(n) + 1; }
function stageE(n) { return stageF(n) + 1; }
function stageD(n) { return stageE(n) + 1; }
function stageC(n) { return stageD(n) + 1; }
function stageB(n) { return stageC(n) + 1; }
function stageA(n) { return stageB(n) + 1; }
function warmPass(seed) {
  let base = seed || 0;
  let total = 0;
  for (let k = 0; k < 6; k++) { total = total + stageA(base + k); }
  return total;
}
/*REDUNDANT*/ warmPass(1);
/*REDUNDANT*/ warmPass(2);
/*REDUNDANT*/ defer(warmPass);
