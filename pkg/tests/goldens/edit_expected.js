function prime(n) {
  let hits = 0;
  for (let i = 0; i < n; i++) { hits = hits + i; }
  return hits;
}
function render() {
  paint(5, 5, 10, 20, 30);
  return 0;
}

render();
markLoaded();
