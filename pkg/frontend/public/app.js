"use strict";
const SENTINEL = "demo page ready";
function busyWork(n) {
    let acc = 0;
    for (let i = 0; i < n; i++) {
        acc = acc + i * 3 % 7;
    }
    return acc;
}
function layer5(depth) { return busyWork(40) + depth; }
function layer4(depth) { return layer5(depth + 1) + busyWork(30); }
function layer3(depth) { return layer4(depth + 1) + busyWork(20); }
function layer2(depth) { return layer3(depth + 1) + busyWork(10); }
function layer1(depth) { return layer2(depth + 1); }
function warmCaches() {
    let total = 0;
    for (let round = 0; round < 4; round++) {
        total = total + layer1(round);
    }
    return total;
}
function scheduleWarmups(rounds) {
    if (rounds > 0) {
        setTimeout(function () { warmCaches(); scheduleWarmups(rounds - 1); }, 0);
    }
    return 0;
}
function renderParagraph() {
    const el = document.getElementById("content");
    if (el) {
        el.textContent = "The quick brown fox jumps over the lazy dog.";
    }
    return 0;
}
function renderBadge() {
    const el = document.getElementById("badge");
    if (el) {
        el.textContent = "static by design";
    }
    return 0;
}
function announceLoaded() {
    const el = document.getElementById("status");
    if (el) {
        el.textContent = SENTINEL;
    }
    return 0;
}
renderParagraph();
renderBadge();
warmCaches();
warmCaches();
scheduleWarmups(3);
setTimeout(function () { announceLoaded(); }, 0);
