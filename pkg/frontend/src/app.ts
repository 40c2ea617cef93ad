// Demo page for the live harness: renders a fixed paragraph and a status
// line, then burns time in a layered warm-up pipeline that never touches
// the screen. The optimizer should be able to strip the warm-up calls while
// every render call has to stay.
//
// Style note: statements here stay within the optimizer's supported grammar
// (no classes, object literals, template strings, or ternaries) so the live
// search can enumerate deletion candidates in the compiled output.

const SENTINEL: string = "demo page ready";

function busyWork(n: number): number {
  let acc = 0;
  for (let i = 0; i < n; i++) { acc = acc + i * 3 % 7; }
  return acc;
}

function layer5(depth: number): number { return busyWork(40) + depth; }
function layer4(depth: number): number { return layer5(depth + 1) + busyWork(30); }
function layer3(depth: number): number { return layer4(depth + 1) + busyWork(20); }
function layer2(depth: number): number { return layer3(depth + 1) + busyWork(10); }
function layer1(depth: number): number { return layer2(depth + 1); }

function warmCaches(): number {
  let total = 0;
  for (let round = 0; round < 4; round++) { total = total + layer1(round); }
  return total;
}

function scheduleWarmups(rounds: number): number {
  if (rounds > 0) {
    setTimeout(function () { warmCaches(); scheduleWarmups(rounds - 1); }, 0);
  }
  return 0;
}

function renderParagraph(): number {
  const el = document.getElementById("content");
  if (el) { el.textContent = "The quick brown fox jumps over the lazy dog."; }
  return 0;
}

function renderBadge(): number {
  const el = document.getElementById("badge");
  if (el) { el.textContent = "static by design"; }
  return 0;
}

function announceLoaded(): number {
  const el = document.getElementById("status");
  if (el) { el.textContent = SENTINEL; }
  return 0;
}

renderParagraph();
renderBadge();
warmCaches();
warmCaches();
scheduleWarmups(3);
setTimeout(function () { announceLoaded(); }, 0);
