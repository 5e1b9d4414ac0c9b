method logical(a : bool, b : bool, c : bool) returns (t : bool) 
  ensures t == (a && b) || (c && a)
{
 t := false;
 if (b) {
    if (a) { t := true; } }  else { t := false; }
 if (c) { t := a; }
}  
